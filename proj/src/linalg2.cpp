#include "tvjump/linalg2.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/LU>

namespace tvjump {

double spectral_norm(const Mat2& m) {
  const double fro2 = m.squaredNorm();
  const double det = m.determinant();
  const double disc = std::max(0.0, fro2 * fro2 - 4.0 * det * det);
  return std::sqrt(0.5 * (fro2 + std::sqrt(disc)));
}

namespace {

double pair_excess_at(const Mat2& w1, const Mat2& w2, double angle) {
  const Vec2 w(std::cos(angle), std::sin(angle));
  return (w1 * w).norm() + (w2 * w).norm() - 2.0;
}

}  // namespace

double sup_pair_excess(const Mat2& w1, const Mat2& w2) {
  // The excess is pi-periodic in the angle.
  constexpr int scan = 256;
  constexpr double pi = std::numbers::pi;
  std::array<double, scan> vals{};
  for (int k = 0; k < scan; ++k) vals[k] = pair_excess_at(w1, w2, pi * k / scan);

  double best = *std::max_element(vals.begin(), vals.end());
  const double step = pi / scan;
  constexpr double inv_phi = 0.6180339887498949;
  for (int k = 0; k < scan; ++k) {
    const double prev = vals[(k + scan - 1) % scan], next = vals[(k + 1) % scan];
    if (vals[k] < prev || vals[k] < next) continue;
    // golden-section on [angle - step, angle + step]
    double a = pi * k / scan - step, b = pi * k / scan + step;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = pair_excess_at(w1, w2, c), fd = pair_excess_at(w1, w2, d);
    for (int it = 0; it < 60; ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = pair_excess_at(w1, w2, c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = pair_excess_at(w1, w2, d);
      }
    }
    best = std::max({best, fc, fd});
  }
  return best;
}

double biestim_upper(const Mat2& w1, const Mat2& w2) {
  const Mat2 s = w1.transpose() * w1 + w2.transpose() * w2 - 2.0 * Mat2::Identity();
  return 0.5 * spectral_norm(s);
}

}  // namespace tvjump
