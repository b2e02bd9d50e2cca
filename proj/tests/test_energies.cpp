#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/SVD>

#include "tvjump/energies.hpp"
#include "tvjump/linalg2.hpp"

using namespace tvjump;

namespace {

Mat2 near_identity(std::mt19937_64& rng, double eps) {
  std::uniform_real_distribution<double> d(-eps, eps);
  Mat2 m = Mat2::Identity();
  for (int k = 0; k < 4; ++k) m(k / 2, k % 2) += d(rng);
  return m;
}

double sup_by_scan(const Mat2& a, const Mat2& b, int steps) {
  double best = -INFINITY;
  for (int k = 0; k < steps; ++k) {
    const double t = M_PI * k / steps;
    const Vec2 w(std::cos(t), std::sin(t));
    best = std::max(best, (a * w).norm() + (b * w).norm() - 2.0);
  }
  return best;
}

}  // namespace

TEST_CASE("power fidelity values") {
  CHECK(phi_value(FidelitySpec::power(2.0), 0.0) == 0.0);
  CHECK(phi_value(FidelitySpec::power(2.0), 3.0) == doctest::Approx(9.0));
  CHECK(phi_value(FidelitySpec::power(1.5), 4.0) == doctest::Approx(8.0));
  CHECK(phi_value(FidelitySpec::power(1.0, 0.5), -3.0) == doctest::Approx(1.5));
  CHECK(FidelitySpec::power(1.5, 2.0).increase_constant == doctest::Approx(3.0));
}

TEST_CASE("p-increase check") {
  FidelitySpec sq = FidelitySpec::power(2.0);
  sq.increase_constant = 1.0;
  const std::vector<SamplePair> pairs{{2.0, 1.0}, {1.0, 1.0}, {-3.0, -3.0}};
  const auto bad = check_p_increasing(sq, pairs);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].x == 2.0);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-5.0, 5.0);
  std::vector<SamplePair> many(5000);
  for (auto& s : many) s = {d(rng), d(rng)};
  for (double p : {1.0, 1.5, 2.0, 3.0}) CHECK(check_p_increasing(FidelitySpec::power(p, 0.7), many).empty());
}

TEST_CASE("Huber energy and its Psi membership") {
  const EnergyPsi h = huber_psi(1.0);
  CHECK(h(2.0) == doctest::Approx(1.5));
  CHECK(h(0.0) == 0.0);
  CHECK(h(0.5) == doctest::Approx(0.125));
  CHECK(h.threshold == doctest::Approx(1.0));
  CHECK(h.coco_bound == doctest::Approx(1.0));

  std::mt19937_64 rng(4);
  for (double eta : {0.1, 1.0, 10.0}) {
    const EnergyPsi psi = huber_psi(eta);
    std::uniform_real_distribution<double> d(0.0, 4.0 / eta);
    std::vector<PsiSamplePair> pairs(20000);
    for (auto& p : pairs) p = {d(rng), d(rng)};
    pairs.push_back({1.0 / eta, 1.0 / eta});
    CHECK(check_psi_membership(psi, pairs).empty());
  }
}

TEST_CASE("the square energy is flagged for large arguments") {
  const EnergyPsi sq = square_psi(1.0, 0.5);
  const std::vector<PsiSamplePair> pairs{{2.0, 3.0}, {5.0, 5.0}};
  const auto bad = check_psi_membership(sq, pairs);
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].s == 2.0);
}

TEST_CASE("concave and Perona-Malik examples") {
  const EnergyPsi c = concave_psi_example();
  CHECK(c(0.0) == 0.0);
  const double fd = (c(1e-7) - c(0.0)) / 1e-7;
  CHECK(fd == doctest::Approx(1.1).epsilon(1e-6));
  CHECK_FALSE(c.convex);
  CHECK(perona_malik_psi()(1.0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("tv_psi_value limits") {
  const std::size_t n = 40;
  const double h = 1.0 / n;
  CHECK(tv_psi_value(GridImage(n, n, h), huber_psi(1.0), 1.0) == 0.0);

  GridImage u(n, n, h);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (auto& v : u.values()) v = d(rng);
  CHECK(tv_psi_value(u, huber_psi(1e6), 1.0) == doctest::Approx(total_variation(u)).epsilon(1e-4));

  // one column of unit jumps: |grad| = 1/h on n cells, each on the linear tail
  GridImage step(n, n, h);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = n / 2; j < n; ++j) step(i, j) = 1.0;
  const double eta = 100.0, alpha = 0.3;
  const double expected = alpha * n * (1.0 / h - 1.0 / (2.0 * eta)) * h * h;
  CHECK(tv_psi_value(step, huber_psi(eta), alpha) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("energy pair gap terms") {
  const EnergyPsi psi = huber_psi(2.0);
  const EnergyPairGap id = energy_pair_gap(psi, Mat2::Identity(), Mat2::Identity(), 1.0, 1.0, Vec2(0.3, 0.4));
  CHECK(id.lhs == doctest::Approx(0.0));
  CHECK(id.rhs_sum() == doctest::Approx(0.0));
  CHECK(energy_pair_gap(psi, 2.0 * Mat2::Identity(), Mat2::Identity(), 1.5, 0.5, Vec2::Zero()).lhs == 0.0);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> cd(-0.05, 0.05), vd(-3.0, 3.0);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double c = 1.0 + cd(rng);
    const Vec2 v(vd(rng), vd(rng));
    const EnergyPairGap g = energy_pair_gap(psi, near_identity(rng, 0.05), near_identity(rng, 0.05), c, 2.0 - c, v);
    if (g.rhs_sum() * g.v_norm > 0.0) worst = std::max(worst, g.lhs / (g.rhs_sum() * g.v_norm));
  }
  CHECK(std::isfinite(worst));
  CHECK(worst < 10.0);
}

TEST_CASE("log energy comparison bound") {
  const EnergyPsi pm = perona_malik_psi();
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> cd(-0.1, 0.1), vd(-3.0, 3.0);
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    const double c = 1.0 + cd(rng), d = 2.0 - c;
    const Mat2 a = near_identity(rng, 0.1), b = near_identity(rng, 0.1);
    const Vec2 v(vd(rng), vd(rng));
    const double lhs = c * pm((a * v).norm()) + d * pm((b * v).norm()) - 2.0 * pm(v.norm());
    if (lhs > perona_malik_bound(a, b, c, d, v) + 1e-10) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("square-root concavity bound on pair excess") {
  CHECK(biestim_upper(Mat2::Identity(), Mat2::Identity()) == doctest::Approx(0.0));
  CHECK(sup_pair_excess(2.0 * Mat2::Identity(), Mat2::Identity()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(biestim_upper(2.0 * Mat2::Identity(), Mat2::Identity()) == doctest::Approx(1.5).epsilon(1e-12));

  std::mt19937_64 rng(12);
  for (int k = 0; k < 200; ++k) {
    const Mat2 a = near_identity(rng, 0.2), b = near_identity(rng, 0.2);
    const double sup = sup_pair_excess(a, b);
    CHECK(sup >= sup_by_scan(a, b, 20000) - 1e-12);
    CHECK(sup <= biestim_upper(a, b) + 1e-12);
  }
}

TEST_CASE("spectral norm against a dense SVD") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    Mat2 m;
    m << d(rng), d(rng), d(rng), d(rng);
    const double ref = Eigen::JacobiSVD<Mat2>(m).singularValues()(0);
    CHECK(spectral_norm(m) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("regulariser json round trip") {
  const auto j = to_json(FidelitySpec::power(1.5, 0.5), RegulariserSpec::huber(0.1, 0.01));
  const auto [fid, reg] = specs_from_json(j);
  CHECK(fid.p == 1.5);
  CHECK(fid.weight == 0.5);
  CHECK(reg.kind == RegulariserSpec::Kind::Psi);
  CHECK(reg.alpha == 0.1);
  CHECK(reg.psi.parameter == 0.01);

  RegulariserSpec sym = RegulariserSpec::tv(0.2);
  sym.stencil = DiffStencil::Symmetric;
  const auto back = specs_from_json(to_json(FidelitySpec::power(1.0), sym)).second;
  CHECK(back.stencil == DiffStencil::Symmetric);
  CHECK(back.kind == RegulariserSpec::Kind::TV);

  nlohmann::json bad = j;
  bad["regulariser"]["stencil"] = "diagonal";
  CHECK_THROWS(specs_from_json(bad));
}
