#include <doctest.h>

#include <cmath>
#include <random>

#include "tvjump/grid.hpp"

using namespace tvjump;

namespace {

GridImage random_image(std::size_t w, std::size_t h, double spacing, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  GridImage u(w, h, spacing);
  for (auto& v : u.values()) v = d(rng);
  return u;
}

// Straight transcription of the forward-difference TV used as an oracle.
double tv_oracle(const GridImage& u) {
  const double h = u.spacing();
  double sum = 0.0;
  for (std::size_t i = 0; i < u.height(); ++i)
    for (std::size_t j = 0; j < u.width(); ++j) {
      const double gx = j + 1 < u.width() ? (u(i, j + 1) - u(i, j)) / h : 0.0;
      const double gy = i + 1 < u.height() ? (u(i + 1, j) - u(i, j)) / h : 0.0;
      sum += std::hypot(gx, gy) * h * h;
    }
  return sum;
}

}  // namespace

TEST_CASE("grad_forward of a constant image vanishes") {
  const GridImage u(7, 5, 0.1, 3.0);
  const VectorField g = grad_forward(u);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(g.dx[k] == 0.0);
    CHECK(g.dy[k] == 0.0);
  }
}

TEST_CASE("grad_forward of a ramp along the columns") {
  const std::size_t n = 6;
  const double h = 1.0 / n;
  GridImage u(n, n, h);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) u(i, j) = static_cast<double>(j) * h;
  const VectorField g = grad_forward(u);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j + 1 < n; ++j) {
      CHECK(g.dx[i * n + j] == doctest::Approx(1.0));
      CHECK(g.dy[i * n + j] == 0.0);
    }
}

TEST_CASE("grad_forward on a 3x3 stripe, hand evaluated") {
  GridImage u(3, 3, 1.0, std::vector<double>{0, 1, 0, 0, 1, 0, 0, 1, 0});
  const VectorField g = grad_forward(u);
  const double dx[] = {1, -1, 0, 1, -1, 0, 1, -1, 0};
  for (std::size_t k = 0; k < 9; ++k) {
    CHECK(g.dx[k] == dx[k]);
    CHECK(g.dy[k] == 0.0);
  }
}

TEST_CASE("div_backward is the negative adjoint of grad_forward") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t w = 3 + trial, hgt = 4 + (trial * 3) % 7;
    const GridImage u = random_image(w, hgt, 0.37, rng);
    VectorField p(w, hgt, 0.37);
    for (std::size_t k = 0; k < p.size(); ++k) p.dx[k] = d(rng), p.dy[k] = d(rng);
    const VectorField g = grad_forward(u);
    const GridImage dv = div_backward(p);
    double lhs = 0.0, rhs = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      lhs += g.dx[k] * p.dx[k] + g.dy[k] * p.dy[k];
      rhs -= u[k] * dv[k];
      scale += std::abs(g.dx[k] * p.dx[k]) + std::abs(g.dy[k] * p.dy[k]);
    }
    CHECK(std::abs(lhs - rhs) <= 1e-12 * scale);
  }
}

TEST_CASE("div_backward of zero and constant fields") {
  const VectorField zero(5, 4, 0.5);
  const GridImage dz = div_backward(zero);
  for (double v : dz.values()) CHECK(v == 0.0);

  VectorField c(5, 4, 1.0);
  std::fill(c.dx.begin(), c.dx.end(), 1.0);
  const GridImage dv = div_backward(c);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      const bool boundary = j == 0 || j == 4;
      if (!boundary) CHECK(dv(i, j) == 0.0);
      else CHECK(dv(i, j) != 0.0);
    }
}

TEST_CASE("total variation: zero, homogeneity and the straight edge") {
  std::mt19937_64 rng(5);
  CHECK(total_variation(GridImage(8, 8, 0.125)) == 0.0);
  const GridImage u = random_image(9, 7, 0.2, rng);
  GridImage cu = u;
  for (auto& v : cu.values()) v *= 2.5;
  CHECK(total_variation(cu) == doctest::Approx(2.5 * total_variation(u)).epsilon(1e-13));
  CHECK(total_variation(u) == doctest::Approx(tv_oracle(u)).epsilon(1e-13));

  const std::size_t n = 32;
  GridImage half(n, n, 1.0 / n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = n / 2; j < n; ++j) half(i, j) = 1.0;
  CHECK(total_variation(half) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("symmetric stencil averages the four one-sided variations") {
  std::mt19937_64 rng(9);
  const GridImage u = random_image(6, 5, 0.25, rng);
  double sum = 0.0;
  for (bool bx : {false, true})
    for (bool by : {false, true}) {
      const VectorField g = grad_one_sided(u, bx, by);
      for (std::size_t k = 0; k < g.size(); ++k) sum += std::hypot(g.dx[k], g.dy[k]) * 0.0625;
    }
  CHECK(total_variation(u, DiffStencil::Symmetric) == doctest::Approx(0.25 * sum).epsilon(1e-13));
  CHECK(total_variation(u, DiffStencil::Forward) == doctest::Approx(total_variation(u)).epsilon(1e-15));
  // the symmetric stencil keeps the exact length of an axis-aligned edge
  const std::size_t n = 16;
  GridImage half(n, n, 1.0 / n);
  for (std::size_t i = n / 2; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) half(i, j) = 1.0;
  CHECK(total_variation(half, DiffStencil::Symmetric) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("variation_on and perimeter") {
  std::mt19937_64 rng(3);
  const std::size_t n = 20;
  const GridImage u = random_image(n, n, 0.05, rng);
  CHECK(variation_on(u, Mask(n, n, true)) == doctest::Approx(total_variation(u)).epsilon(1e-13));
  CHECK(variation_on(u, Mask(n, n, false)) == 0.0);

  GridImage half(n, n, 1.0 / n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = n / 2; j < n; ++j) half(i, j) = 1.0;
  Mask lower(n, n);
  for (std::size_t i = 0; i < n / 4; ++i)
    for (std::size_t j = 0; j < n; ++j) lower.set(i, j, true);
  CHECK(variation_on(half, lower) == doctest::Approx(0.25).epsilon(1e-14));

  CHECK(perimeter(Mask(n, n), 0.05) == 0.0);
  Mask square(n, n);
  for (std::size_t i = 5; i < 13; ++i)
    for (std::size_t j = 4; j < 12; ++j) square.set(i, j, true);
  // the forward stencil turns the far corner diagonal; the other three stay exact
  const double s = 8.0 / n;
  const double corner = (std::sqrt(2.0) - 2.0) / n;
  CHECK(perimeter(square, 1.0 / n) == doctest::Approx(4.0 * s + corner).epsilon(1e-13));
}

TEST_CASE("bilinear sampling reproduces affine functions") {
  const std::size_t n = 10;
  GridImage u(n, n, 0.1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Vec2 c = u.cell_centre(i, j);
      u(i, j) = 2.0 * c.x() - 3.0 * c.y() + 1.0;
    }
  for (const Vec2 x : {Vec2(0.31, 0.52), Vec2(0.07 + 0.5, 0.93 - 0.1), Vec2(0.5, 0.5)})
    CHECK(u.sample(x) == doctest::Approx(2.0 * x.x() - 3.0 * x.y() + 1.0).epsilon(1e-13));
}

TEST_CASE("invalid images are rejected") {
  CHECK_THROWS_AS(GridImage(3, 3, 1.0, std::vector<double>(5)), std::invalid_argument);
  CHECK_THROWS_AS(GridImage(3, 3, -1.0).validate(), std::invalid_argument);
}
