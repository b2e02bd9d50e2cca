#include "tvjump/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tvjump {

GridImage::GridImage(std::size_t width, std::size_t height, double spacing, double fill)
    : width_(width), height_(height), spacing_(spacing), values_(width * height, fill) {
  validate();
}

GridImage::GridImage(std::size_t width, std::size_t height, double spacing, std::vector<double> values)
    : width_(width), height_(height), spacing_(spacing), values_(std::move(values)) {
  validate();
}

void GridImage::validate() const {
  if (width_ < 2 || height_ < 2)
    throw std::invalid_argument("GridImage: width and height must be at least 2");
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_))
    throw std::invalid_argument("GridImage: spacing must be positive");
  if (values_.size() != width_ * height_)
    throw std::invalid_argument("GridImage: value count " + std::to_string(values_.size()) +
                                " does not match " + std::to_string(width_) + "x" + std::to_string(height_));
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("GridImage: non-finite value");
}

double GridImage::sample(const Vec2& x) const {
  // continuous index coordinates of the cell centres
  double cx = x.x() / spacing_ - 0.5;
  double cy = x.y() / spacing_ - 0.5;
  cx = std::clamp(cx, 0.0, static_cast<double>(width_ - 1));
  cy = std::clamp(cy, 0.0, static_cast<double>(height_ - 1));
  auto j0 = static_cast<std::size_t>(std::floor(cx));
  auto i0 = static_cast<std::size_t>(std::floor(cy));
  std::size_t j1 = std::min(j0 + 1, width_ - 1);
  std::size_t i1 = std::min(i0 + 1, height_ - 1);
  double a = cx - static_cast<double>(j0);
  double b = cy - static_cast<double>(i0);
  double top = (1.0 - a) * (*this)(i0, j0) + a * (*this)(i0, j1);
  double bottom = (1.0 - a) * (*this)(i1, j0) + a * (*this)(i1, j1);
  return (1.0 - b) * top + b * bottom;
}

double GridImage::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridImage::max() const { return *std::max_element(values_.begin(), values_.end()); }
double GridImage::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double VectorField::norm_at(std::size_t k) const { return std::hypot(dx[k], dy[k]); }

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
}

VectorField grad_forward(const GridImage& u) {
  const std::size_t w = u.width(), h = u.height();
  const double inv = 1.0 / u.spacing();
  VectorField g(w, h, u.spacing());
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      std::size_t k = i * w + j;
      g.dx[k] = j + 1 < w ? (u(i, j + 1) - u(i, j)) * inv : 0.0;
      g.dy[k] = i + 1 < h ? (u(i + 1, j) - u(i, j)) * inv : 0.0;
    }
  }
  return g;
}

GridImage div_backward(const VectorField& p) {
  const std::size_t w = p.width, h = p.height;
  const double inv = 1.0 / p.spacing;
  GridImage d(w, h, p.spacing);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      std::size_t k = i * w + j;
      double ax;
      if (j == 0)
        ax = p.dx[k];
      else if (j + 1 == w)
        ax = -p.dx[k - 1];
      else
        ax = p.dx[k] - p.dx[k - 1];
      double ay;
      if (i == 0)
        ay = p.dy[k];
      else if (i + 1 == h)
        ay = -p.dy[k - w];
      else
        ay = p.dy[k] - p.dy[k - w];
      d[k] = (ax + ay) * inv;
    }
  }
  return d;
}

double total_variation(const GridImage& u) {
  const VectorField g = grad_forward(u);
  double sum = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) sum += g.norm_at(k);
  return sum * u.spacing() * u.spacing();
}

VectorField grad_one_sided(const GridImage& u, bool backward_x, bool backward_y) {
  const std::size_t w = u.width(), h = u.height();
  const double inv = 1.0 / u.spacing();
  VectorField g(w, h, u.spacing());
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      double& gx = g.dx[i * w + j];
      double& gy = g.dy[i * w + j];
      if (backward_x) {
        if (j > 0) gx = (u(i, j) - u(i, j - 1)) * inv;
      } else if (j + 1 < w) {
        gx = (u(i, j + 1) - u(i, j)) * inv;
      }
      if (backward_y) {
        if (i > 0) gy = (u(i, j) - u(i - 1, j)) * inv;
      } else if (i + 1 < h) {
        gy = (u(i + 1, j) - u(i, j)) * inv;
      }
    }
  }
  return g;
}

double total_variation(const GridImage& u, DiffStencil stencil) {
  if (stencil == DiffStencil::Forward) return total_variation(u);
  double sum = 0.0;
  for (int b = 0; b < 4; ++b) {
    const VectorField g = grad_one_sided(u, b & 1, b & 2);
    for (std::size_t k = 0; k < g.size(); ++k) sum += g.norm_at(k);
  }
  return 0.25 * sum * u.spacing() * u.spacing();
}

double variation_on(const GridImage& u, const Mask& region) {
  if (!region.matches(u)) throw std::invalid_argument("variation_on: mask dimensions do not match image");
  const VectorField g = grad_forward(u);
  double sum = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k)
    if (region[k]) sum += g.norm_at(k);
  return sum * u.spacing() * u.spacing();
}

GridImage indicator(const Mask& region, double spacing, double inside, double outside) {
  GridImage img(region.width(), region.height(), spacing, outside);
  for (std::size_t k = 0; k < region.size(); ++k)
    if (region[k]) img[k] = inside;
  return img;
}

double perimeter(const Mask& region, double spacing) { return total_variation(indicator(region, spacing)); }

}  // namespace tvjump
