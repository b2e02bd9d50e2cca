#include <doctest.h>

#include <cmath>
#include <random>

#include "tvjump/solver.hpp"

using namespace tvjump;

namespace {

// Minimiser of tau w |x - f|^p + (x - v)^2 / 2 by bisection on the derivative.
double prox_by_bisection(double p, double tw, double f, double v) {
  auto dfun = [&](double x) {
    const double e = x - f;
    return tw * p * std::copysign(std::pow(std::abs(e), p - 1.0), e) + (x - v);
  };
  double lo = std::min(f, v), hi = std::max(f, v);
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (dfun(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Root of an increasing function on [a, b] by bisection, clipped to the ends.
template <class F>
double increasing_root(F&& fn, double a, double b) {
  if (fn(a) >= 0.0) return a;
  if (fn(b) <= 0.0) return b;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (a + b);
    (fn(mid) > 0.0 ? b : a) = mid;
  }
  return 0.5 * (a + b);
}

GridImage random_image(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  GridImage f(n, n, 1.0 / n);
  for (auto& v : f.values()) v = d(rng);
  return f;
}

GridImage disk(std::size_t n, double radius) {
  GridImage f(n, n, 1.0 / n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if ((f.cell_centre(i, j) - Vec2(0.5, 0.5)).norm() < radius) f(i, j) = 1.0;
  return f;
}

}  // namespace

TEST_CASE("fidelity prox spot values") {
  CHECK(prox_fidelity(FidelitySpec::power(2.0, 0.5), 1.0, 0.0, 1.0) == doctest::Approx(0.5));
  CHECK(prox_fidelity(FidelitySpec::power(1.0), 0.3, 2.0, 2.0) == 2.0);
  CHECK(prox_fidelity(FidelitySpec::power(1.0), 0.3, 2.0, 2.2) == 2.0);
  CHECK(prox_fidelity(FidelitySpec::power(1.0), 0.3, 2.0, 3.0) == doctest::Approx(2.7));
  for (double p : {1.5, 1.3, 2.5})
    for (double v : {-2.0, -0.01, 0.3, 4.0}) {
      const double got = prox_fidelity(FidelitySpec::power(p, 0.7), 0.9, 0.25, v);
      CHECK(got == doctest::Approx(prox_by_bisection(p, 0.63, 0.25, v)).epsilon(1e-10));
    }
}

TEST_CASE("dual prox of TV and Huber") {
  const RegulariserSpec tv = RegulariserSpec::tv(0.5);
  const Vec2 inside(0.1, -0.2);
  CHECK((prox_dual_regulariser(tv, 1.0, inside) - inside).norm() == 0.0);
  const Vec2 out = prox_dual_regulariser(tv, 1.0, Vec2(0.6, 0.8));
  CHECK(out.norm() == doctest::Approx(0.5));
  CHECK(out.x() == doctest::Approx(0.3));

  // prox of sigma F^* with F^*(q) = |q|^2 / (2 alpha eta) on |q| <= alpha
  const double alpha = 0.4, eta = 2.5, sigma = 0.7;
  const RegulariserSpec hub = RegulariserSpec::huber(alpha, eta);
  for (const Vec2 p : {Vec2(0.05, 0.02), Vec2(0.3, -0.4), Vec2(-2.0, 1.0)}) {
    // stationarity of sigma x^2 / (2 alpha eta) + (x - |p|)^2 / 2 on [0, alpha]
    const double r = increasing_root([&](double x) { return sigma * x / (alpha * eta) + x - p.norm(); }, 0.0, alpha);
    const Vec2 want = p.normalized() * r;
    CHECK((prox_dual_regulariser(hub, sigma, p) - want).norm() <= 1e-10);
  }
}

TEST_CASE("generic radial prox agrees with the closed forms") {
  const double alpha = 0.4, eta = 2.5, sigma = 0.7;
  const RegulariserSpec generic = RegulariserSpec::with_psi(alpha, huber_psi(eta));
  RegulariserSpec renamed = generic;
  renamed.psi.name = "huber-copy";
  const RegulariserSpec closed = RegulariserSpec::huber(alpha, eta);
  for (const Vec2 p : {Vec2(0.05, 0.02), Vec2(0.3, -0.4), Vec2(-2.0, 1.0)})
    CHECK((prox_dual_regulariser(renamed, sigma, p) - prox_dual_regulariser(closed, sigma, p)).norm() <= 1e-10);
}

TEST_CASE("objective against an independent accumulation") {
  const GridImage f = random_image(9, 1), u = random_image(9, 2);
  const FidelitySpec fid = FidelitySpec::power(1.5, 0.5);
  const RegulariserSpec reg = RegulariserSpec::tv(0.2);
  const double h = f.spacing();
  double data = 0.0, tv = 0.0;
  for (std::size_t i = 9; i-- > 0;)
    for (std::size_t j = 9; j-- > 0;) {
      data += 0.5 * std::pow(std::abs(f(i, j) - u(i, j)), 1.5);
      const double gx = j + 1 < 9 ? u(i, j + 1) - u(i, j) : 0.0;
      const double gy = i + 1 < 9 ? u(i + 1, j) - u(i, j) : 0.0;
      tv += std::sqrt(gx * gx + gy * gy) * h;
    }
  CHECK(objective_value(u, f, fid, reg) == doctest::Approx(data * h * h + 0.2 * tv).epsilon(1e-12));
  CHECK(objective_value(f, f, FidelitySpec::power(2.0), reg) == doctest::Approx(0.2 * total_variation(f)));
  CHECK(objective_value(GridImage(4, 4, 0.25), GridImage(4, 4, 0.25), fid, reg) == 0.0);
}

TEST_CASE("constant data is a fixed point") {
  const GridImage f(12, 12, 1.0 / 12, 0.7);
  for (double p : {1.0, 1.5, 2.0}) {
    const SolveResult r = solve_denoise(f, FidelitySpec::power(p), RegulariserSpec::tv(0.1));
    CHECK(r.objective == doctest::Approx(0.0));
    for (std::size_t k = 0; k < f.size(); ++k) CHECK(r.solution[k] == doctest::Approx(0.7).epsilon(1e-12));
  }
  const SolveResult o = oracle_solve(f, FidelitySpec::power(2.0), RegulariserSpec::huber(0.1, 1.0));
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(o.solution[k] == 0.7);
}

TEST_CASE("ROF on a disk agrees with the oracle and shrinks the contrast") {
  const std::size_t n = 24;
  const double radius = 0.3, alpha = 0.02;
  const GridImage f = disk(n, radius);
  const FidelitySpec fid = FidelitySpec::power(2.0, 0.5);
  const RegulariserSpec reg = RegulariserSpec::tv(alpha);
  SolverConfig cfg;
  cfg.tolerance = 1e-10;
  cfg.max_iterations = 200000;
  const SolveResult fast = solve_denoise(f, fid, reg, cfg);
  const SolveResult ref = oracle_solve(f, fid, reg);
  REQUIRE(ref.converged);
  CHECK(std::abs(fast.objective - ref.objective) <= 1e-6 * ref.objective);
  // calibrable set: the inside drops by alpha Per / |E| and the outside
  // rises by alpha Per / |complement|
  const double per = 2.0 * M_PI * radius, area = M_PI * radius * radius;
  CHECK(ref.solution(n / 2, n / 2) == doctest::Approx(1.0 - alpha * per / area).epsilon(0.05));
  CHECK(ref.solution(0, 0) == doctest::Approx(alpha * per / (1.0 - area)).epsilon(0.1));
}

TEST_CASE("L1-TV keeps a disk for small alpha and removes it for large alpha") {
  const std::size_t n = 16;
  const GridImage f = disk(n, 0.3);
  const FidelitySpec fid = FidelitySpec::power(1.0);
  const SolveResult keep = oracle_solve(f, fid, RegulariserSpec::tv(0.02));
  const SolveResult drop = oracle_solve(f, fid, RegulariserSpec::tv(0.5));
  double dk = 0.0, dd = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    dk = std::max(dk, std::abs(keep.solution[k] - f[k]));
    dd = std::max(dd, std::abs(drop.solution[k]));
  }
  CHECK(dk < 1e-3);
  CHECK(dd < 1e-3);
}

TEST_CASE("solver agrees with the oracle on random data") {
  const GridImage f = random_image(8, 21);
  for (double p : {1.0, 1.5, 2.0})
    for (const RegulariserSpec& reg : {RegulariserSpec::tv(0.05), RegulariserSpec::huber(0.05, 0.1)}) {
      const FidelitySpec fid = FidelitySpec::power(p, 0.5);
      SolverConfig cfg;
      cfg.tolerance = 1e-10;
      cfg.max_iterations = 400000;
      const SolveResult a = solve_denoise(f, fid, reg, cfg);
      const SolveResult b = oracle_solve(f, fid, reg);
      CHECK(std::abs(a.objective - b.objective) <= 1e-6 * std::abs(b.objective));
      if (p > 1.0)
        for (std::size_t k = 0; k < f.size(); ++k) {
          CHECK(a.solution[k] >= f.min() - 1e-6);
          CHECK(a.solution[k] <= f.max() + 1e-6);
        }
    }
}

TEST_CASE("symmetric stencil solves match the oracle") {
  const GridImage f = disk(12, 0.3);
  RegulariserSpec reg = RegulariserSpec::tv(0.03);
  reg.stencil = DiffStencil::Symmetric;
  SolverConfig cfg;
  cfg.tolerance = 1e-10;
  cfg.max_iterations = 400000;
  const SolveResult a = solve_denoise(f, FidelitySpec::power(2.0), reg, cfg);
  const SolveResult b = oracle_solve(f, FidelitySpec::power(2.0), reg);
  CHECK(std::abs(a.objective - b.objective) <= 1e-6 * b.objective);
  CHECK(a.objective == doctest::Approx(objective_value(a.solution, f, FidelitySpec::power(2.0), reg)));
}

TEST_CASE("step validation") {
  SolverConfig cfg;
  cfg.tau = 1.0;
  cfg.sigma = 1.0;
  CHECK_THROWS_AS(cfg.validate(0.1), std::invalid_argument);
  cfg.tau = 0.01;
  cfg.sigma = 0.01 * 0.01 / (8.0 * 0.01);
  CHECK_NOTHROW(cfg.validate(0.01));
  CHECK_THROWS_AS(cfg.validate(0.01, 4), std::invalid_argument);
  CHECK_THROWS(oracle_solve(GridImage(40, 40, 0.025), FidelitySpec::power(2.0), RegulariserSpec::tv(0.1)));
}
