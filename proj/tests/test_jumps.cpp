#include <doctest.h>

#include <cmath>
#include <random>

#include "tvjump/jumps.hpp"
#include "tvjump/pushforward.hpp"

using namespace tvjump;

namespace {

GridImage disk_image(std::size_t n, const Vec2& c, double radius) {
  GridImage u(n, n, 1.0 / n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if ((u.cell_centre(i, j) - c).norm() < radius) u(i, j) = 1.0;
  return u;
}

GridImage rotate90(const GridImage& u) {
  GridImage r(u.height(), u.width(), u.spacing());
  for (std::size_t i = 0; i < u.height(); ++i)
    for (std::size_t j = 0; j < u.width(); ++j) r(j, u.height() - 1 - i) = u(i, j);
  return r;
}

}  // namespace

TEST_CASE("jump detection on simple images") {
  const std::size_t n = 32;
  CHECK(detect_jumps(GridImage(n, n, 1.0 / n, 4.0)).empty());

  GridImage half(n, n, 1.0 / n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 12; j < n; ++j) half(i, j) = 1.0;
  const JumpSet js = detect_jumps(half, {3, 0.5});
  REQUIRE(js.size() == n);
  for (const JumpSample& s : js.samples) {
    CHECK(s.magnitude == 1.0);
    CHECK(s.col == 11);
    CHECK(s.normal.x() == 1.0);
    CHECK(s.location.x() == doctest::Approx(12.0 / n));
  }

  GridImage ramp(n, n, 1.0 / n);
  const double theta = 0.5, step = 0.9 * theta / 6.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ramp(i, j) = step * j;
  CHECK(detect_jumps(ramp, {3, theta}).empty());
}

TEST_CASE("jump detection is equivariant") {
  GridImage u = disk_image(40, Vec2(0.45, 0.55), 0.2);
  const JumpSet a = detect_jumps(u);
  CHECK(detect_jumps(rotate90(u)).size() == a.size());
  for (auto& v : u.values()) v += 3.0;
  CHECK(detect_jumps(u).size() == a.size());
}

TEST_CASE("containment excess counts far samples") {
  const std::size_t n = 32;
  GridImage half(n, n, 1.0 / n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 16; j < n; ++j) half(i, j) = 1.0;
  const JumpSet jf = detect_jumps(half);
  CHECK(containment_excess(jf, jf, 0.0) == 0.0);
  CHECK(containment_excess(jf, jf, 2.0) == 0.0);
  JumpSet empty = jf;
  empty.samples.clear();
  CHECK(containment_excess(empty, jf) == 0.0);

  JumpSet ju = jf;
  JumpSample far = ju.samples.front();
  far.location.x() += 10.0 / n;
  ju.samples.push_back(far);
  CHECK(containment_excess(ju, jf, 1.0) == doctest::Approx(1.0 / ju.size()));
  JumpSet near = jf;
  near.samples.front().location.x() += 1.0 / n;
  CHECK(containment_excess(near, jf, 1.0) == 0.0);
  CHECK(containment_excess(near, jf, 0.5) == doctest::Approx(1.0 / near.size()));
}

TEST_CASE("contours and circle fits") {
  const GridImage u = disk_image(512, Vec2(0.5, 0.5), 0.3);
  const CurvatureReport rep = level_line_curvature(u, 0.5);
  CHECK(rep.fitted_radius == doctest::Approx(0.3).epsilon(0.02));
  const auto lines = extract_contours(u, 0.5);
  REQUIRE(lines.size() == 1);
  CHECK((lines[0].front() - lines[0].back()).norm() == 0.0);
  CHECK_THROWS(level_line_curvature(u, 2.0));

  std::vector<Vec2> pts;
  for (int k = 0; k < 50; ++k) {
    const double t = 0.1 * k;
    pts.emplace_back(0.2 + 0.15 * std::cos(t), 0.7 + 0.15 * std::sin(t));
  }
  const CircleFit c = fit_circle(pts);
  CHECK(c.radius == doctest::Approx(0.15).epsilon(1e-12));
  CHECK((c.centre - Vec2(0.2, 0.7)).norm() <= 1e-12);

  std::vector<Vec2> line{{0.0, 0.0}, {0.1, 0.2}, {0.2, 0.4}, {0.3, 0.6}};
  CHECK(fit_circle(line).curvature == 0.0);
}

TEST_CASE("straight level lines have vanishing curvature") {
  const std::size_t n = 128;
  GridImage ramp(n, n, 1.0 / n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ramp(i, j) = ramp.cell_centre(i, j).dot(Vec2(0.6, 0.8));
  const CurvatureReport rep = level_line_curvature(ramp, 0.55);
  for (double k : rep.curvature) CHECK(std::abs(k) <= 1e-6);
}

TEST_CASE("rounded corner radius") {
  // square [0.2, 0.8]^2 with corners rounded to radius 0.05, smoothed indicator
  const std::size_t n = 256;
  const double rad = 0.05;
  GridImage u(n, n, 1.0 / n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Vec2 x = u.cell_centre(i, j);
      const Vec2 q((std::abs(x.x() - 0.5) - (0.3 - rad)), (std::abs(x.y() - 0.5) - (0.3 - rad)));
      const double outside = Vec2(std::max(q.x(), 0.0), std::max(q.y(), 0.0)).norm();
      const double sd = outside + std::min(std::max(q.x(), q.y()), 0.0) - rad;
      u(i, j) = 0.5 - std::clamp(sd * n, -0.5, 0.5);
    }
  const CornerFit fit = corner_radius(u, 0.5, Vec2(0.2, 0.2), Vec2(1.0, 1.0), 4.0 * rad);
  CHECK(fit.radius == doctest::Approx(rad).epsilon(0.03));
  CHECK(fit.edges.x() == doctest::Approx(0.2).epsilon(0.01));
  CHECK(fit.edges.y() == doctest::Approx(0.2).epsilon(0.01));
}

TEST_CASE("mean curvature of a sampled graph") {
  const std::vector<double> flat(50, 0.3);
  for (double k : mean_curvature_of_graph(flat, 0.01)) CHECK(k == 0.0);
  std::vector<double> line;
  for (int k = 0; k < 50; ++k) line.push_back(0.25 * k * 0.01);
  for (double k : mean_curvature_of_graph(line, 0.01)) CHECK(std::abs(k) <= 1e-12);

  auto worst_error = [](double R, double dx) {
    std::vector<double> f;
    const int half = static_cast<int>(std::round(0.5 * R / dx));
    for (int k = -half; k <= half; ++k) f.push_back(std::sqrt(R * R - k * dx * k * dx));
    double worst = 0.0;
    for (double kappa : mean_curvature_of_graph(f, dx)) worst = std::max(worst, std::abs(kappa - 1.0 / R));
    return worst;
  };
  CHECK(worst_error(0.3, 1e-3) <= 0.01 / 0.3);
  const double factor = worst_error(0.3, 1e-3) / worst_error(0.3, 5e-4);
  CHECK(factor >= 3.0);
  CHECK(factor <= 5.0);
}

TEST_CASE("R-curvature of jump interfaces") {
  const RegulariserSpec tv = RegulariserSpec::tv(0.1);
  const Bump bump = standard_bump_profile();
  const QuadratureSpec quad{256, false};

  const FunctionalImage flat = graph_jump_image(flat_graph(0.5), 1.0, 0.0);
  CHECK(std::abs(r_curvature_estimate(flat, flat_graph(0.5), 0.5, bump, 0.01, 1e-3, tv, quad).estimate) <= 1e-2);

  for (double R : {0.2, 0.3}) {
    const Vec2 c(0.5, 0.4);
    const LipschitzGraph arc = circle_arc_graph(c, R, 0.5 * R);
    const FunctionalImage one = disk_jump_image(c, R, 1.0, 0.0, 0.5 * R);
    const FunctionalImage two = disk_jump_image(c, R, 2.0, 0.0, 0.5 * R);
    const double e1 = r_curvature_estimate(one, arc, c.x(), bump, 0.02, 1e-3, tv, quad).estimate;
    const double e2 = r_curvature_estimate(two, arc, c.x(), bump, 0.02, 1e-3, tv, quad).estimate;
    CHECK(e1 == doctest::Approx(0.1 / R).epsilon(0.1));
    CHECK(e2 == doctest::Approx(2.0 * e1).epsilon(1e-6));
  }
}
