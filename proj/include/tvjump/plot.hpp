#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tvjump/grid.hpp"

namespace tvjump::plot {

using Rgb = std::array<std::uint8_t, 3>;

/// An RGB raster with a few drawing primitives and a 5x7 bitmap font.
class Canvas {
public:
  Canvas(std::size_t width, std::size_t height, Rgb background = {255, 255, 255});

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  /// Pixel (x, y) with y growing downwards; out-of-range writes are dropped.
  void set(long x, long y, Rgb colour);
  Rgb get(std::size_t x, std::size_t y) const;
  void line(long x0, long y0, long x1, long y1, Rgb colour);
  void rect(long x0, long y0, long x1, long y1, Rgb colour);
  /// Upper-case letters, digits and " .,:;-+=()/%_<>|*'"; other characters
  /// are drawn as blanks. Lower case is shown in upper case.
  void text(long x, long y, const std::string& s, Rgb colour, int scale = 1);
  static std::size_t text_width(const std::string& s, int scale = 1) { return s.size() * 6 * scale; }

  /// Greyscale rendering of an image (row 0 at the bottom) into a box.
  void image(const GridImage& img, long x0, long y0, std::size_t box, double lo, double hi);

  void save_png(const std::filesystem::path& path) const;

private:
  std::size_t width_, height_;
  std::vector<std::uint8_t> pixels_;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Log-log plot of the positive points of every series with a least-squares
/// line and "slope = ..." per series. Throws without writing when no series
/// has two positive points.
void loglog_plot(const std::filesystem::path& path, const std::vector<Series>& series, const std::string& title);

/// Loads a CSV with a header row; column `x` against every column in `ys`.
/// Throws when the file has no data rows or a column is missing.
std::vector<Series> series_from_csv(const std::filesystem::path& csv, const std::string& x,
                                    const std::vector<std::string>& ys);

/// Greyscale image with polylines drawn on top (unit-square coordinates).
void contour_overlay(const std::filesystem::path& path, const GridImage& img,
                     const std::vector<std::vector<Vec2>>& lines, const std::string& title);

/// Side-by-side panels of f, u and |u - f|, each scaled to its own range.
void solve_panel(const std::filesystem::path& path, const GridImage& f, const GridImage& u);

}  // namespace tvjump::plot
