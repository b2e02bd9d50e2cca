#include <doctest.h>

#include <cmath>
#include <random>

#include "tvjump/pushforward.hpp"

using namespace tvjump;

TEST_CASE("analytic gradients match central differences") {
  CHECK(gaussian_image(Vec2(0.4, 0.6), 0.1, 2.0).gradient_consistency(200) <= 1e-6);
  CHECK(linear_image(Vec2(1.0, -2.0), 0.5).gradient_consistency(200) <= 1e-6);
}

TEST_CASE("bump and graph integrals") {
  CHECK(bump_integral(standard_bump_profile()) == doctest::Approx(1.0).epsilon(1e-14));
  const auto one = [](double) { return 1.0; };
  LipschitzGraph flat = flat_graph(0.5);
  flat.domain_radius = 0.3;
  CHECK(weighted_graph_area(flat, one) == doctest::Approx(0.6).epsilon(1e-13));

  LipschitzGraph diag;
  diag.height = [](double v) { return v; };
  diag.slope = [](double) { return 1.0; };
  diag.lipschitz = 1.0;
  CHECK(weighted_graph_area(diag, one) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));

  const double R = 0.4, half = 0.3;
  const LipschitzGraph arc = circle_arc_graph(Vec2(0.5, 0.2), R, half);
  CHECK(std::abs(weighted_graph_area(arc, one) - 2.0 * R * std::asin(half / R)) <= 1e-6);
}

TEST_CASE("wedge area equals rho r^2 for the standard bump") {
  const ShiftTransform none(flat_graph(0.5), 0.5, 0.1, 0.0);
  const WedgeArea w0 = wedge_area(none);
  CHECK(w0.analytic == 0.0);
  CHECK(w0.pixel_count == 0.0);
  const ShiftTransform tr(flat_graph(0.5), 0.5, 0.1, 0.25);
  const WedgeArea w = wedge_area(tr, 512);
  CHECK(w.analytic == doctest::Approx(0.25 * 0.01).epsilon(1e-12));
  CHECK(w.pixel_count == doctest::Approx(w.analytic).epsilon(0.02));
}

TEST_CASE("grid pushforward") {
  const std::size_t n = 64;
  const double h = 1.0 / n;
  GridImage below(n, n, h);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (below.cell_centre(i, j).y() < 0.5) below(i, j) = 1.0;

  const ShiftTransform none(flat_graph(0.5), 0.5, 0.1, 0.0);
  const GridImage same = pushforward_grid(below, none);
  for (std::size_t k = 0; k < below.size(); ++k) CHECK(same[k] == below[k]);

  // the interface of each column rises by rho h_r(v)
  const ShiftTransform tr(flat_graph(0.5), 0.5, 0.1, 0.3);
  const GridImage pushed = pushforward_grid(below, tr);
  for (std::size_t j = 0; j < n; ++j) {
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) mass += pushed(i, j) * h;
    const double v = (j + 0.5) * h;
    CHECK(std::abs(mass - (0.5 + tr.shift(v))) <= h);
  }
}

TEST_CASE("pushforward variation by quadrature") {
  const ShiftTransform none(flat_graph(0.5), 0.5, 0.1, 0.0);
  const Vec2 g(0.6, -0.8);
  const TvPushforward lin = tv_pushforward_quadrature(linear_image(g), none, {256, false});
  const double box = (2.0 * 0.1) * (2.0 * none.box_half_height());
  CHECK(lin.inside == doctest::Approx(g.norm() * box).epsilon(1e-12));
  CHECK(lin.total() == doctest::Approx(g.norm()).epsilon(1e-12));

  const FunctionalImage bump = gaussian_image(Vec2(0.5, 0.45), 0.12);
  const ShiftTransform tr(flat_graph(0.5), 0.5, 0.1, 0.3);
  const double quad = tv_pushforward_quadrature(bump, tr, {512, false}).total();
  for (std::size_t n : {128, 256}) {
    const double grid = total_variation(pushforward_grid(rasterise(bump, n), tr));
    CHECK(std::abs(grid - quad) <= 2.0 * quad / static_cast<double>(n));
  }
  CHECK_THROWS(tv_pushforward_quadrature(graph_jump_image(flat_graph(0.5), 1.0, 0.0), tr));
}

TEST_CASE("double-Lipschitz gap for TV") {
  const FunctionalImage u = gaussian_image(Vec2(0.48, 0.53), 0.15);
  const RegulariserSpec tv = RegulariserSpec::tv(0.1);
  const ShiftTransform none(flat_graph(0.5), 0.5, 0.05, 0.0);
  CHECK(double_lip_gap(u, none, none, tv, {256, false}).lhs == doctest::Approx(0.0));

  auto gap = [&](double rho) {
    const ShiftTransform a(flat_graph(0.5), 0.5, 0.05, rho);
    const DoubleLipGap d = double_lip_gap(u, a, a.with_magnitude(-rho), tv, {512, false}, 32);
    CHECK_FALSE(d.violation);
    CHECK(d.lhs <= d.g_bound * (1.0 + 1e-6));
    return d.lhs;
  };
  gap(0.1);
  const double ratio = gap(0.01) / gap(0.005);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("transport estimate") {
  const ShiftTransform none(flat_graph(0.5), 0.5, 0.1, 0.0);
  const GridImage img = rasterise(gaussian_image(Vec2(0.5, 0.5), 0.1), 64);
  const TransportCheck t0 = transport_check(img, none);
  CHECK(t0.integral == 0.0);
  CHECK(t0.bound == 0.0);

  const ShiftTransform tr(flat_graph(0.5), 0.5, 0.1, 0.3);
  const TransportCheck flat = transport_check(GridImage(64, 64, 1.0 / 64, 2.0), tr);
  CHECK(flat.integral == 0.0);
  CHECK(flat.bound >= 0.0);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> c(0.3, 0.7), w(0.05, 0.2);
  for (int k = 0; k < 5; ++k) {
    const GridImage u = rasterise(gaussian_image(Vec2(c(rng), c(rng)), w(rng)), 256);
    const TransportCheck t = transport_check(u, tr);
    CHECK(t.integral <= 1.05 * t.bound);
  }
}
