#include "tvjump/plot.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace tvjump::plot {

namespace {

struct Glyph {
  char c;
  const char* rows[7];
};

// 5x7 cells, '#' marks ink
constexpr Glyph kFont[] = {
    {'0', {" ### ", "#   #", "#  ##", "# # #", "##  #", "#   #", " ### "}},
    {'1', {"  #  ", " ##  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}},
    {'2', {" ### ", "#   #", "    #", "   # ", "  #  ", " #   ", "#####"}},
    {'3', {"#####", "   # ", "  #  ", "   # ", "    #", "#   #", " ### "}},
    {'4', {"   # ", "  ## ", " # # ", "#  # ", "#####", "   # ", "   # "}},
    {'5', {"#####", "#    ", "#### ", "    #", "    #", "#   #", " ### "}},
    {'6', {"  ## ", " #   ", "#    ", "#### ", "#   #", "#   #", " ### "}},
    {'7', {"#####", "    #", "   # ", "  #  ", " #   ", " #   ", " #   "}},
    {'8', {" ### ", "#   #", "#   #", " ### ", "#   #", "#   #", " ### "}},
    {'9', {" ### ", "#   #", "#   #", " ####", "    #", "   # ", " ##  "}},
    {'A', {" ### ", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}},
    {'B', {"#### ", "#   #", "#   #", "#### ", "#   #", "#   #", "#### "}},
    {'C', {" ### ", "#   #", "#    ", "#    ", "#    ", "#   #", " ### "}},
    {'D', {"#### ", "#   #", "#   #", "#   #", "#   #", "#   #", "#### "}},
    {'E', {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#####"}},
    {'F', {"#####", "#    ", "#    ", "#### ", "#    ", "#    ", "#    "}},
    {'G', {" ### ", "#   #", "#    ", "# ###", "#   #", "#   #", " ####"}},
    {'H', {"#   #", "#   #", "#   #", "#####", "#   #", "#   #", "#   #"}},
    {'I', {" ### ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", " ### "}},
    {'J', {"  ###", "   # ", "   # ", "   # ", "   # ", "#  # ", " ##  "}},
    {'K', {"#   #", "#  # ", "# #  ", "##   ", "# #  ", "#  # ", "#   #"}},
    {'L', {"#    ", "#    ", "#    ", "#    ", "#    ", "#    ", "#####"}},
    {'M', {"#   #", "## ##", "# # #", "# # #", "#   #", "#   #", "#   #"}},
    {'N', {"#   #", "#   #", "##  #", "# # #", "#  ##", "#   #", "#   #"}},
    {'O', {" ### ", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}},
    {'P', {"#### ", "#   #", "#   #", "#### ", "#    ", "#    ", "#    "}},
    {'Q', {" ### ", "#   #", "#   #", "#   #", "# # #", "#  # ", " ## #"}},
    {'R', {"#### ", "#   #", "#   #", "#### ", "# #  ", "#  # ", "#   #"}},
    {'S', {" ####", "#    ", "#    ", " ### ", "    #", "    #", "#### "}},
    {'T', {"#####", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  "}},
    {'U', {"#   #", "#   #", "#   #", "#   #", "#   #", "#   #", " ### "}},
    {'V', {"#   #", "#   #", "#   #", "#   #", "#   #", " # # ", "  #  "}},
    {'W', {"#   #", "#   #", "#   #", "# # #", "# # #", "# # #", " # # "}},
    {'X', {"#   #", "#   #", " # # ", "  #  ", " # # ", "#   #", "#   #"}},
    {'Y', {"#   #", "#   #", " # # ", "  #  ", "  #  ", "  #  ", "  #  "}},
    {'Z', {"#####", "    #", "   # ", "  #  ", " #   ", "#    ", "#####"}},
    {'.', {"     ", "     ", "     ", "     ", "     ", " ##  ", " ##  "}},
    {',', {"     ", "     ", "     ", "     ", " ##  ", "  #  ", " #   "}},
    {':', {"     ", " ##  ", " ##  ", "     ", " ##  ", " ##  ", "     "}},
    {';', {"     ", " ##  ", " ##  ", "     ", " ##  ", "  #  ", " #   "}},
    {'-', {"     ", "     ", "     ", "#####", "     ", "     ", "     "}},
    {'+', {"     ", "  #  ", "  #  ", "#####", "  #  ", "  #  ", "     "}},
    {'=', {"     ", "     ", "#####", "     ", "#####", "     ", "     "}},
    {'(', {"   # ", "  #  ", " #   ", " #   ", " #   ", "  #  ", "   # "}},
    {')', {" #   ", "  #  ", "   # ", "   # ", "   # ", "  #  ", " #   "}},
    {'/', {"     ", "    #", "   # ", "  #  ", " #   ", "#    ", "     "}},
    {'%', {"##   ", "##  #", "   # ", "  #  ", " #   ", "#  ##", "   ##"}},
    {'_', {"     ", "     ", "     ", "     ", "     ", "     ", "#####"}},
    {'<', {"   # ", "  #  ", " #   ", "#    ", " #   ", "  #  ", "   # "}},
    {'>', {" #   ", "  #  ", "   # ", "    #", "   # ", "  #  ", " #   "}},
    {'|', {"  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  ", "  #  "}},
    {'*', {"     ", "  #  ", "# # #", " ### ", "# # #", "  #  ", "     "}},
    {'\'', {"  #  ", "  #  ", " #   ", "     ", "     ", "     ", "     "}},
};

const Glyph* find_glyph(char c) {
  if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  for (const auto& g : kFont)
    if (g.c == c) return &g;
  return nullptr;
}

constexpr Rgb kPalette[] = {{31, 119, 180}, {214, 39, 40}, {44, 160, 44}, {148, 103, 189}, {255, 127, 14}};
constexpr Rgb kBlack{0, 0, 0};
constexpr Rgb kGrey{200, 200, 200};

std::string fmt(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    out.push_back(cell);
  }
  return out;
}

}  // namespace

Canvas::Canvas(std::size_t width, std::size_t height, Rgb background)
    : width_(width), height_(height), pixels_(width * height * 3) {
  if (width == 0 || height == 0) throw std::invalid_argument("Canvas: empty size");
  for (std::size_t k = 0; k < width * height; ++k)
    std::copy(background.begin(), background.end(), pixels_.begin() + static_cast<long>(3 * k));
}

void Canvas::set(long x, long y, Rgb colour) {
  if (x < 0 || y < 0 || x >= static_cast<long>(width_) || y >= static_cast<long>(height_)) return;
  const std::size_t k = 3 * (static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x));
  pixels_[k] = colour[0];
  pixels_[k + 1] = colour[1];
  pixels_[k + 2] = colour[2];
}

Rgb Canvas::get(std::size_t x, std::size_t y) const {
  const std::size_t k = 3 * (y * width_ + x);
  return {pixels_[k], pixels_[k + 1], pixels_[k + 2]};
}

void Canvas::line(long x0, long y0, long x1, long y1, Rgb colour) {
  const long dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const long sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  long err = dx + dy;
  while (true) {
    set(x0, y0, colour);
    if (x0 == x1 && y0 == y1) break;
    const long e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void Canvas::rect(long x0, long y0, long x1, long y1, Rgb colour) {
  line(x0, y0, x1, y0, colour);
  line(x1, y0, x1, y1, colour);
  line(x1, y1, x0, y1, colour);
  line(x0, y1, x0, y0, colour);
}

void Canvas::text(long x, long y, const std::string& s, Rgb colour, int scale) {
  for (std::size_t n = 0; n < s.size(); ++n) {
    const Glyph* g = find_glyph(s[n]);
    if (!g) continue;
    const long ox = x + static_cast<long>(n) * 6 * scale;
    for (int r = 0; r < 7; ++r)
      for (int c = 0; c < 5; ++c)
        if (g->rows[r][c] == '#')
          for (int a = 0; a < scale; ++a)
            for (int b = 0; b < scale; ++b) set(ox + c * scale + b, y + r * scale + a, colour);
  }
}

void Canvas::image(const GridImage& img, long x0, long y0, std::size_t box, double lo, double hi) {
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t py = 0; py < box; ++py) {
    for (std::size_t px = 0; px < box; ++px) {
      const std::size_t col = std::min(img.width() - 1, px * img.width() / box);
      const std::size_t row = std::min(img.height() - 1, (box - 1 - py) * img.height() / box);
      const double t = std::clamp((img(row, col) - lo) / span, 0.0, 1.0);
      const auto g = static_cast<std::uint8_t>(std::lround(255.0 * t));
      set(x0 + static_cast<long>(px), y0 + static_cast<long>(py), {g, g, g});
    }
  }
}

void Canvas::save_png(const std::filesystem::path& path) const {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw std::runtime_error("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng failed writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width_), static_cast<png_uint_32>(height_), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < height_; ++y)
    png_write_row(png, const_cast<png_bytep>(pixels_.data() + 3 * y * width_));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void loglog_plot(const std::filesystem::path& path, const std::vector<Series>& series, const std::string& title) {
  struct Clean {
    const Series* s;
    std::vector<double> lx, ly;
  };
  std::vector<Clean> data;
  for (const auto& s : series) {
    Clean c{&s, {}, {}};
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (s.x[k] > 0.0 && s.y[k] > 0.0 && std::isfinite(s.x[k]) && std::isfinite(s.y[k])) {
        c.lx.push_back(std::log10(s.x[k]));
        c.ly.push_back(std::log10(s.y[k]));
      }
    }
    if (c.lx.size() >= 2) data.push_back(std::move(c));
  }
  if (data.empty()) throw std::invalid_argument("loglog_plot: no series with two positive points");

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& c : data) {
    for (double v : c.lx) xmin = std::min(xmin, v), xmax = std::max(xmax, v);
    for (double v : c.ly) ymin = std::min(ymin, v), ymax = std::max(ymax, v);
  }
  if (xmax - xmin < 1e-12) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
  const double padx = 0.05 * (xmax - xmin), pady = 0.05 * (ymax - ymin);
  xmin -= padx, xmax += padx, ymin -= pady, ymax += pady;

  const long W = 720, H = 520, left = 80, right = 20, top = 40, bottom = 60 + 14 * static_cast<long>(data.size());
  Canvas cv(W, H);
  const long pw = W - left - right, ph = H - top - bottom;
  auto sx = [&](double v) { return left + std::lround((v - xmin) / (xmax - xmin) * static_cast<double>(pw)); };
  auto sy = [&](double v) { return top + ph - std::lround((v - ymin) / (ymax - ymin) * static_cast<double>(ph)); };

  for (long d = static_cast<long>(std::ceil(xmin)); d <= static_cast<long>(std::floor(xmax)); ++d) {
    cv.line(sx(d), top, sx(d), top + ph, kGrey);
    cv.text(sx(d) - 12, top + ph + 6, "1E" + std::to_string(d), kBlack);
  }
  for (long d = static_cast<long>(std::ceil(ymin)); d <= static_cast<long>(std::floor(ymax)); ++d) {
    cv.line(left, sy(d), left + pw, sy(d), kGrey);
    cv.text(left - 42, sy(d) - 3, "1E" + std::to_string(d), kBlack);
  }
  cv.rect(left, top, left + pw, top + ph, kBlack);
  cv.text(left, 14, title, kBlack, 2);

  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto& c = data[n];
    const Rgb colour = kPalette[n % std::size(kPalette)];
    // least-squares line in log space
    const double m = static_cast<double>(c.lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < c.lx.size(); ++k) mx += c.lx[k], my += c.ly[k];
    mx /= m, my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < c.lx.size(); ++k) {
      sxx += (c.lx[k] - mx) * (c.lx[k] - mx);
      sxy += (c.lx[k] - mx) * (c.ly[k] - my);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    const double x0 = *std::min_element(c.lx.begin(), c.lx.end()), x1 = *std::max_element(c.lx.begin(), c.lx.end());
    cv.line(sx(x0), sy(my + slope * (x0 - mx)), sx(x1), sy(my + slope * (x1 - mx)), colour);
    for (std::size_t k = 0; k < c.lx.size(); ++k) {
      const long px = sx(c.lx[k]), py = sy(c.ly[k]);
      for (long d = -3; d <= 3; ++d) {
        cv.set(px + d, py, colour);
        cv.set(px, py + d, colour);
      }
    }
    cv.text(left, top + ph + 26 + 14 * static_cast<long>(n), c.s->label + "  SLOPE = " + fmt(slope, 4), colour);
  }
  cv.save_png(path);
}

std::vector<Series> series_from_csv(const std::filesystem::path& csv, const std::string& x,
                                    const std::vector<std::string>& ys) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot read " + csv.string());
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(csv.string() + ": empty CSV");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::invalid_argument(csv.string() + ": no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t xc = column(x);
  std::vector<std::size_t> yc;
  std::vector<Series> out;
  for (const auto& y : ys) {
    yc.push_back(column(y));
    out.push_back({y, {}, {}});
  }
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw std::invalid_argument(csv.string() + ": ragged row");
    ++rows;
    for (std::size_t k = 0; k < yc.size(); ++k) {
      out[k].x.push_back(std::stod(cells[xc]));
      out[k].y.push_back(std::stod(cells[yc[k]]));
    }
  }
  if (rows == 0) throw std::invalid_argument(csv.string() + ": no data rows");
  return out;
}

void contour_overlay(const std::filesystem::path& path, const GridImage& img,
                     const std::vector<std::vector<Vec2>>& lines, const std::string& title) {
  const std::size_t box = 512;
  const long margin = 30;
  Canvas cv(box + 2 * margin, box + 2 * margin);
  cv.image(img, margin, margin, box, img.min(), img.max());
  const double side = static_cast<double>(img.width()) * img.spacing();
  auto px = [&](const Vec2& p) { return margin + std::lround(p.x() / side * static_cast<double>(box)); };
  auto py = [&](const Vec2& p) { return margin + static_cast<long>(box) - std::lround(p.y() / side * static_cast<double>(box)); };
  for (const auto& l : lines)
    for (std::size_t k = 1; k < l.size(); ++k) cv.line(px(l[k - 1]), py(l[k - 1]), px(l[k]), py(l[k]), kPalette[1]);
  cv.text(margin, 8, title, kBlack, 2);
  cv.save_png(path);
}

void solve_panel(const std::filesystem::path& path, const GridImage& f, const GridImage& u) {
  if (!f.same_shape(u)) throw std::invalid_argument("solve_panel: image shapes differ");
  GridImage diff(f.width(), f.height(), f.spacing());
  for (std::size_t k = 0; k < f.size(); ++k) diff[k] = std::abs(u[k] - f[k]);
  const std::size_t box = 256;
  const long margin = 20, label = 24;
  Canvas cv(3 * box + 4 * margin, box + 2 * margin + label);
  const GridImage* panels[] = {&f, &u, &diff};
  const char* names[] = {"F", "U", "|U - F|  MAX " };
  for (int k = 0; k < 3; ++k) {
    const long x0 = margin + k * static_cast<long>(box + margin);
    std::string name = names[k];
    if (k == 2) name += fmt(diff.max());
    cv.text(x0, margin / 2, name, kBlack, 2);
    cv.image(*panels[k], x0, margin + label, box, panels[k]->min(), panels[k]->max());
  }
  cv.save_png(path);
}

}  // namespace tvjump::plot
