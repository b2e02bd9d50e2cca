#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "tvjump/linalg2.hpp"
#include "tvjump/shift.hpp"

using namespace tvjump;

namespace {

Vec2 random_in_box(const ShiftTransform& tr, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double v = tr.centre_v() + tr.radius() * u(rng);
  const double t = tr.graph().height(tr.centre_v()) + tr.box_half_height() * u(rng);
  return tr.graph().from_coords(v, t);
}

Mat2 fd_jacobian(const ShiftTransform& tr, const Vec2& x, double step) {
  Mat2 j;
  for (int k = 0; k < 2; ++k) {
    Vec2 e = Vec2::Zero();
    e(k) = step;
    j.col(k) = (gamma_apply(tr, x + e) - gamma_apply(tr, x - e)) / (2.0 * step);
  }
  return j;
}

// Distance of x from the kinks of the piecewise formula: the graph, the taper
// ends and the bump centre / ends.
double kink_distance(const ShiftTransform& tr, const Vec2& x) {
  const Vec2 c = tr.graph().coords(x);
  const double delta = c.y() - tr.graph().height(c.x());
  const double s = tr.taper();
  double d = std::min({std::abs(delta), std::abs(std::abs(delta) - s)});
  for (double off : {-tr.radius(), 0.0, tr.radius()}) d = std::min(d, std::abs(c.x() - tr.centre_v() - off));
  return d;
}

}  // namespace

TEST_CASE("standard bump values") {
  CHECK(standard_bump(1.0) == 0.0);
  CHECK(standard_bump(-1.0) == 0.0);
  CHECK(standard_bump(0.5) == doctest::Approx(0.5));
  CHECK(standard_bump(0.0) == 1.0);
  CHECK(standard_bump(2.0) == 0.0);
}

TEST_CASE("zero magnitude is the identity") {
  const ShiftTransform id(flat_graph(0.5), 0.5, 0.1, 0.0);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 100; ++k) {
    const Vec2 x = random_in_box(id, rng);
    CHECK((gamma_apply(id, x) - x).norm() == 0.0);
    CHECK((gamma_inverse(id, x) - x).norm() == 0.0);
    CHECK((gamma_grad(id, x) - Mat2::Identity()).norm() == 0.0);
    CHECK(jacobian_det(id, x) == 1.0);
    CHECK((lipjac_matrix(id, x) - Mat2::Identity()).norm() == 0.0);
  }
  CHECK(max_displacement(id) == 0.0);
}

TEST_CASE("the graph centre moves by rho r") {
  const double rho = 0.25, r = 0.1;
  const ShiftTransform tr(flat_graph(0.5), 0.5, r, rho);
  const Vec2 y = gamma_apply(tr, Vec2(0.5, 0.5));
  CHECK(y.x() == doctest::Approx(0.5));
  CHECK(y.y() == doctest::Approx(0.5 + rho * r));
  CHECK((gamma_inverse(tr, y) - Vec2(0.5, 0.5)).norm() <= 1e-14);
  CHECK(max_displacement(tr) == doctest::Approx(0.025));
  CHECK(sampled_displacement(tr) >= max_displacement(tr) * (1.0 - 1e-3));
  CHECK(sampled_displacement(tr) <= max_displacement(tr) * (1.0 + 1e-12));
  // points outside the support box stay put
  for (const Vec2 x : {Vec2(0.1, 0.5), Vec2(0.5, 0.9), Vec2(0.65, 0.5)}) CHECK((gamma_apply(tr, x) - x).norm() == 0.0);
}

TEST_CASE("gradient at the centre, lower branch") {
  const double rho = 0.3;
  const ShiftTransform tr(flat_graph(0.5), 0.5, 0.1, rho);
  const Vec2 below(0.5, 0.5 - 0.05);
  const Mat2 g = gamma_grad(tr, below);
  CHECK(g(1, 1) == doctest::Approx(1.0 + rho / 3.0));
  CHECK(jacobian_det(tr, below) == doctest::Approx(1.0 + rho / 3.0));
  const Mat2 w = lipjac_matrix(tr, below);
  CHECK(w(0, 0) == doctest::Approx(1.0 + rho / 3.0));
  CHECK(w(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("round trip, finite differences and matrix identities on random points") {
  std::mt19937_64 rng(7);
  const LipschitzGraph graphs[] = {flat_graph(0.5), circle_arc_graph(Vec2(0.5, 0.2), 0.4, 0.3)};
  for (const LipschitzGraph& g : graphs) {
    const ShiftTransform tr(g, 0.5, 0.08, 0.3);
    double worst_round = 0.0, worst_fd = 0.0;
    for (int k = 0; k < 2000; ++k) {
      const Vec2 x = random_in_box(tr, rng);
      worst_round = std::max(worst_round, (gamma_inverse(tr, gamma_apply(tr, x)) - x).norm());
      const Mat2 grad = gamma_grad(tr, x);
      CHECK(jacobian_det(tr, x) == doctest::Approx(std::abs(grad.determinant())).epsilon(1e-12));
      CHECK((inverse_grad(tr, x) * grad - Mat2::Identity()).norm() <= 1e-12);
      CHECK((lipjac_matrix(tr, x) - grad.inverse() * jacobian_det(tr, x)).norm() <= 1e-12);
      if (kink_distance(tr, x) > 1e-4) worst_fd = std::max(worst_fd, (fd_jacobian(tr, x, 1e-6) - grad).norm());
    }
    CHECK(worst_round <= 1e-12);
    CHECK(worst_fd <= 1e-5);
  }
}

TEST_CASE("pair Jacobians sum to two") {
  const ShiftTransform tr(circle_arc_graph(Vec2(0.5, 0.2), 0.4, 0.3), 0.5, 0.08, 0.2);
  const ShiftTransform back = tr.with_magnitude(-0.2);
  std::mt19937_64 rng(9);
  for (int k = 0; k < 1000; ++k) {
    const Vec2 x = random_in_box(tr, rng);
    CHECK(std::abs(jacobian_det(tr, x) + jacobian_det(back, x) - 2.0) <= 1e-14);
  }
}

TEST_CASE("closed-form Gram eigenvalues") {
  const EigenPair id = eigenvalues_gradgram(0.0, 1.0);
  CHECK(id.small == doctest::Approx(1.0));
  CHECK(id.large == doctest::Approx(1.0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    const double c = u(rng), d = u(rng);
    const EigenPair e = eigenvalues_gradgram(c, d);
    CHECK(e.small * e.large == doctest::Approx(d * d).epsilon(1e-12));
    Mat2 m;
    m << 1.0, 0.0, c, d;
    const Eigen::SelfAdjointEigenSolver<Mat2> es(m.transpose() * m);
    CHECK(e.small == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-10));
    CHECK(e.large == doctest::Approx(es.eigenvalues()(1)).epsilon(1e-10));
  }
}

TEST_CASE("comparison constants") {
  const ShiftTransform id(flat_graph(0.5), 0.5, 0.1, 0.0);
  const ComparisonConstants zero = comparison_constants(id, id, 32);
  CHECK(zero.total() == doctest::Approx(0.0));

  auto ratio = [](double rho) {
    const ShiftTransform a(flat_graph(0.5), 0.5, 0.1, rho);
    const ComparisonConstants c = comparison_constants(a, a.with_magnitude(-rho), 64);
    CHECK(c.j <= 1e-14);
    CHECK(c.g <= c.g_upper + 1e-12);
    return c.total() / (rho * rho);
  };
  CHECK(ratio(0.01) == doctest::Approx(ratio(0.005)).epsilon(0.01));
}

TEST_CASE("scaling sweep slopes") {
  std::vector<double> rhos;
  for (int k = 10; k >= 3; --k) rhos.push_back(std::ldexp(1.0, -k));
  rhos.insert(rhos.begin(), 0.0);
  const ScalingSweep sw = scaling_sweep(flat_graph(0.5), 0.5, 0.1, standard_bump_profile(), rhos, 32);
  CHECK(sw.rows.front().pair.total() == 0.0);
  CHECK(sw.pair_slope == doctest::Approx(2.0).epsilon(0.05));
  CHECK(sw.identity_slope == doctest::Approx(1.0).epsilon(0.1));
  CHECK_THROWS(loglog_slope({1.0, 2.0}, {1.0, 4.0}));
  CHECK(loglog_slope({1.0, 2.0, 4.0}, {3.0, 12.0, 48.0}) == doctest::Approx(2.0));
}
