#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace tvjump {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Scalar field sampled at the cell centres of a uniform 2-D grid.
///
/// Cell (row i, column j) has centre ((j + 1/2) h, (i + 1/2) h), so an N x N
/// image with h = 1/N covers the unit square. Values are stored row-major.
class GridImage {
public:
  GridImage() = default;
  GridImage(std::size_t width, std::size_t height, double spacing, double fill = 0.0);
  GridImage(std::size_t width, std::size_t height, double spacing, std::vector<double> values);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  double spacing() const { return spacing_; }

  double& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
  double operator()(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  Vec2 cell_centre(std::size_t row, std::size_t col) const {
    return {(static_cast<double>(col) + 0.5) * spacing_, (static_cast<double>(row) + 0.5) * spacing_};
  }

  /// Bilinear interpolation between cell centres, clamped at the border.
  double sample(const Vec2& x) const;

  double min() const;
  double max() const;
  double mean() const;

  bool same_shape(const GridImage& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Throws std::invalid_argument when the invariants are broken.
  void validate() const;

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  double spacing_ = 1.0;
  std::vector<double> values_;
};

/// Two components (d/dx along columns, d/dy along rows) per cell.
struct VectorField {
  std::size_t width = 0;
  std::size_t height = 0;
  double spacing = 1.0;
  std::vector<double> dx;
  std::vector<double> dy;

  VectorField() = default;
  VectorField(std::size_t w, std::size_t h, double step)
      : width(w), height(h), spacing(step), dx(w * h, 0.0), dy(w * h, 0.0) {}

  std::size_t size() const { return dx.size(); }
  double norm_at(std::size_t k) const;
};

class Mask {
public:
  Mask() = default;
  Mask(std::size_t width, std::size_t height, bool fill = false)
      : width_(width), height_(height), cells_(width * height, fill ? 1 : 0) {}

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return cells_.size(); }

  bool operator()(std::size_t row, std::size_t col) const { return cells_[row * width_ + col] != 0; }
  bool operator[](std::size_t k) const { return cells_[k] != 0; }
  void set(std::size_t row, std::size_t col, bool on) { cells_[row * width_ + col] = on ? 1 : 0; }
  void set(std::size_t k, bool on) { cells_[k] = on ? 1 : 0; }

  std::size_t count() const;

  bool matches(const GridImage& img) const { return width_ == img.width() && height_ == img.height(); }

private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<unsigned char> cells_;
};

/// Forward differences divided by the spacing, zero on the last column/row.
VectorField grad_forward(const GridImage& u);

/// Backward-difference divergence, the negative adjoint of grad_forward:
/// <grad_forward(u), p> = -<u, div_backward(p)>.
GridImage div_backward(const VectorField& p);

/// One-sided differences per axis (forward or backward), zero where the
/// neighbour falls outside the grid.
VectorField grad_one_sided(const GridImage& u, bool backward_x, bool backward_y);

/// Forward: |grad_forward u| per cell. Symmetric: the mean of the isotropic
/// norms of the four forward/backward combinations, which treats all four
/// diagonal directions alike.
enum class DiffStencil { Forward, Symmetric };

/// Isotropic discrete total variation, sum of |grad u| h^2 in row-major order.
double total_variation(const GridImage& u);
double total_variation(const GridImage& u, DiffStencil stencil);

/// Total variation restricted to the masked cells.
double variation_on(const GridImage& u, const Mask& region);

/// Perimeter of a set, computed as the total variation of its indicator.
double perimeter(const Mask& region, double spacing);

GridImage indicator(const Mask& region, double spacing, double inside = 1.0, double outside = 0.0);

}  // namespace tvjump
