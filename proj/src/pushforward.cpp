#include "tvjump/pushforward.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace tvjump {

namespace {

constexpr double kDiffStep = 1e-6;

using GaussRule = boost::math::quadrature::gauss<double, 20>;

template <class F>
double composite_gauss(F&& f, std::vector<double> breaks, std::size_t panels) {
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], step = (breaks[k + 1] - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) sum += GaussRule::integrate(f, a + p * step, a + (p + 1) * step);
  }
  return sum;
}

Vec2 central_gradient(const std::function<double(const Vec2&)>& f, const Vec2& x) {
  const Vec2 ex(kDiffStep, 0.0), ey(0.0, kDiffStep);
  return {(f(x + ex) - f(x - ex)) / (2.0 * kDiffStep), (f(x + ey) - f(x - ey)) / (2.0 * kDiffStep)};
}

void require_support_inside(const ShiftTransform& tr) {
  const LipschitzGraph& g = tr.graph();
  const double v0 = tr.centre_v(), r = tr.radius(), t0 = g.height(v0), half = tr.box_half_height();
  for (double dv : {-r, r})
    for (double dt : {-half, half}) {
      const Vec2 x = g.from_coords(v0 + dv, t0 + dt);
      if (x.x() < -1e-12 || x.x() > 1.0 + 1e-12 || x.y() < -1e-12 || x.y() > 1.0 + 1e-12)
        throw std::invalid_argument("support box of the transform leaves the unit square");
    }
}

void require_jump_on_graph(const FunctionalImage& u, const ShiftTransform& tr) {
  if (!u.jump) return;
  const LipschitzGraph& a = u.jump->graph;
  const LipschitzGraph& b = tr.graph();
  bool same = (a.normal - b.normal).norm() <= 1e-12;
  for (int k = -4; k <= 4 && same; ++k) {
    const double v = tr.centre_v() + 0.25 * k * tr.radius();
    same = std::abs(a.height(v) - b.height(v)) <= 1e-12;
  }
  if (!same) throw std::invalid_argument("the jump of u must lie on the transform's graph");
}

/// Column data of one transform at abscissa v.
struct Column {
  double h = 0.0, hp = 0.0;
};

/// Midpoint nodes on the support box in graph coordinates. Columns split at
/// the bump centre; rows split at f - s, f and f + s so that every node lies
/// strictly inside one branch. `band_only` restricts rows to |t - f| < s.
template <class F>
void for_each_node(const ShiftTransform& tr, std::size_t nodes, bool band_only, F&& visit) {
  if (nodes < 2) throw std::invalid_argument("quadrature needs at least two nodes per axis");
  const LipschitzGraph& g = tr.graph();
  const std::size_t half_cols = nodes / 2;
  const double r = tr.radius(), v0 = tr.centre_v(), s = tr.taper();
  const double t0 = g.height(v0), half = tr.box_half_height();
  const double dv = r / static_cast<double>(half_cols);
  const std::size_t band_rows = std::max<std::size_t>(1, nodes / 2);
  const double dt = s / static_cast<double>(band_rows);
  for (std::size_t col = 0; col < 2 * half_cols; ++col) {
    const double v = v0 - r + (static_cast<double>(col) + 0.5) * dv;
    const double f = g.height(v), fp = g.derivative(v);
    auto segment = [&](double a, double b, std::size_t count) {
      if (!(b > a) || count == 0) return;
      const double step = (b - a) / static_cast<double>(count);
      for (std::size_t k = 0; k < count; ++k) {
        const double t = a + (static_cast<double>(k) + 0.5) * step;
        visit(v, t, t - f, f, fp, step * dv);
      }
    };
    segment(f - s, f, band_rows);
    segment(f, f + s, band_rows);
    if (!band_only) {
      const double below = f - s - (t0 - half), above = t0 + half - (f + s);
      segment(t0 - half, f - s, static_cast<std::size_t>(std::ceil(below / dt - 1e-9)));
      segment(f + s, t0 + half, static_cast<std::size_t>(std::ceil(above / dt - 1e-9)));
    }
  }
}

/// psi(|W^T g| / J) J for the local gradient (gv, gt).
double pushed_density(const EnergyPsi& psi, bool linear, const ShiftJet& jet, double gv, double gt) {
  const double q0 = jet.d * gv - jet.c * gt;
  const double n = std::sqrt(q0 * q0 + gt * gt);
  if (linear) return n;
  const double j = std::abs(jet.d);
  return psi.value(n / j) * j;
}

/// alpha psi_inf int lambda (sqrt(1 + (f' + h')^2) - sqrt(1 + f'^2)) over the bump support.
double singular_change(const FunctionalImage& u, const ShiftTransform& tr, const RegulariserSpec& reg) {
  if (!u.jump || tr.magnitude() == 0.0) return 0.0;
  const LipschitzGraph& g = tr.graph();
  const GraphJump& jump = *u.jump;
  auto integrand = [&](double v) {
    const double fp = g.derivative(v), hp = tr.shift_slope(v);
    const double a = std::sqrt(1.0 + (fp + hp) * (fp + hp)), b = std::sqrt(1.0 + fp * fp);
    return jump.magnitude(v) * hp * (2.0 * fp + hp) / (a + b);
  };
  const double v0 = tr.centre_v(), r = tr.radius();
  return reg.singular_weight() * composite_gauss(integrand, {v0 - r, v0, v0 + r}, 32);
}

RegulariserChange change_at(const FunctionalImage& u, const ShiftTransform& tr, const RegulariserSpec& reg,
                            std::size_t nodes) {
  const EnergyPsi& psi = reg.energy();
  const bool linear = reg.kind == RegulariserSpec::Kind::TV;
  const LipschitzGraph& g = tr.graph();
  const Vec2 e = g.tangent(), z = g.normal;
  const double s = tr.taper();
  RegulariserChange out;
  double col_v = std::numeric_limits<double>::quiet_NaN();
  Column col;
  for_each_node(tr, nodes, true, [&](double v, double t, double delta, double, double fp, double w) {
    if (v != col_v) {
      col_v = v;
      col = {tr.shift(v), tr.shift_slope(v)};
    }
    const Vec2 grad = u.grad(g.from_coords(v, t));
    const double gv = grad.dot(e), gt = grad.dot(z);
    const ShiftJet jet = shift_jet(delta, s, col.h, col.hp, fp);
    const double base = linear ? std::sqrt(gv * gv + gt * gt) : psi.value(std::sqrt(gv * gv + gt * gt));
    out.smooth += w * (pushed_density(psi, linear, jet, gv, gt) - base);
  });
  out.smooth *= reg.alpha;
  out.singular = singular_change(u, tr, reg);
  return out;
}

double pair_smooth_change(const FunctionalImage& u, const ShiftTransform& t1, const ShiftTransform& t2,
                          const RegulariserSpec& reg, std::size_t nodes) {
  const EnergyPsi& psi = reg.energy();
  const bool linear = reg.kind == RegulariserSpec::Kind::TV;
  const LipschitzGraph& g = t1.graph();
  const Vec2 e = g.tangent(), z = g.normal;
  const double s = t1.taper();
  double sum = 0.0;
  double col_v = std::numeric_limits<double>::quiet_NaN();
  Column c1, c2;
  for_each_node(t1, nodes, true, [&](double v, double t, double delta, double, double fp, double w) {
    if (v != col_v) {
      col_v = v;
      c1 = {t1.shift(v), t1.shift_slope(v)};
      c2 = {t2.shift(v), t2.shift_slope(v)};
    }
    const Vec2 grad = u.grad(g.from_coords(v, t));
    const double gv = grad.dot(e), gt = grad.dot(z);
    const double norm = std::sqrt(gv * gv + gt * gt);
    const double base = linear ? norm : psi.value(norm);
    const double a = pushed_density(psi, linear, shift_jet(delta, s, c1.h, c1.hp, fp), gv, gt);
    const double b = pushed_density(psi, linear, shift_jet(delta, s, c2.h, c2.hp, fp), gv, gt);
    sum += w * ((a - base) + (b - base));
  });
  return reg.alpha * sum;
}

void require_shared_support(const ShiftTransform& t1, const ShiftTransform& t2) {
  bool same = t1.centre_v() == t2.centre_v() && t1.radius() == t2.radius() &&
              (t1.graph().normal - t2.graph().normal).norm() <= 1e-12;
  for (int k = -4; k <= 4 && same; ++k) {
    const double v = t1.centre_v() + 0.25 * k * t1.radius();
    same = std::abs(t1.graph().height(v) - t2.graph().height(v)) <= 1e-12;
  }
  if (!same) throw std::invalid_argument("double_lip_gap: transforms must share graph, centre and radius");
}

}  // namespace

Vec2 FunctionalImage::grad(const Vec2& x) const { return gradient ? gradient(x) : central_gradient(value, x); }

double FunctionalImage::gradient_consistency(std::size_t samples, std::uint64_t seed) const {
  if (!gradient) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  double worst = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const Vec2 x(unit(rng), unit(rng));
    if (jump) {
      const Vec2 vt = jump->graph.coords(x);
      if (jump->graph.in_domain(vt.x()) && std::abs(vt.y() - jump->graph.height(vt.x())) < 1e-4) continue;
    }
    worst = std::max(worst, (gradient(x) - central_gradient(value, x)).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

FunctionalImage gaussian_image(const Vec2& centre, double width, double amplitude, double offset) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_image: width must be positive");
  FunctionalImage u;
  const double inv = 1.0 / (2.0 * width * width);
  u.value = [=](const Vec2& x) { return offset + amplitude * std::exp(-(x - centre).squaredNorm() * inv); };
  u.gradient = [=](const Vec2& x) -> Vec2 {
    const Vec2 d = x - centre;
    return -2.0 * inv * amplitude * std::exp(-d.squaredNorm() * inv) * d;
  };
  u.name = "gaussian";
  return u;
}

FunctionalImage linear_image(const Vec2& slope, double offset) {
  FunctionalImage u;
  u.value = [=](const Vec2& x) { return offset + slope.dot(x); };
  u.gradient = [=](const Vec2&) { return slope; };
  u.name = "linear";
  return u;
}

FunctionalImage graph_jump_image(const LipschitzGraph& graph, double above, double below,
                                 const std::optional<FunctionalImage>& background) {
  FunctionalImage u;
  const auto bg_value = background ? background->value : std::function<double(const Vec2&)>{};
  u.value = [=](const Vec2& x) {
    const Vec2 vt = graph.coords(x);
    const double base = vt.y() > graph.height(vt.x()) ? above : below;
    return bg_value ? base + bg_value(x) : base;
  };
  if (background) {
    const FunctionalImage bg = *background;
    u.gradient = [bg](const Vec2& x) { return bg.grad(x); };
  } else {
    u.gradient = [](const Vec2&) { return Vec2(0.0, 0.0); };
  }
  GraphJump j;
  j.graph = graph;
  j.upper = [=](double v) { return bg_value ? above + bg_value(graph.point(v)) : above; };
  j.lower = [=](double v) { return bg_value ? below + bg_value(graph.point(v)) : below; };
  u.jump = std::move(j);
  u.name = "jump:" + graph.name;
  return u;
}

FunctionalImage disk_jump_image(const Vec2& centre, double radius, double inside, double outside, double half_width) {
  FunctionalImage u;
  u.value = [=](const Vec2& x) { return (x - centre).norm() < radius ? inside : outside; };
  u.gradient = [](const Vec2&) { return Vec2(0.0, 0.0); };
  GraphJump j;
  j.graph = circle_arc_graph(centre, radius, half_width);
  j.upper = [outside](double) { return outside; };
  j.lower = [inside](double) { return inside; };
  u.jump = std::move(j);
  u.name = "jump:circle";
  return u;
}

GridImage rasterise(const FunctionalImage& u, std::size_t n) {
  GridImage img(n, n, 1.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) img(i, j) = u.value(img.cell_centre(i, j));
  return img;
}

GridImage pushforward_grid(const GridImage& u, const ShiftTransform& tr) {
  GridImage out(u.width(), u.height(), u.spacing());
  for (std::size_t i = 0; i < u.height(); ++i) {
    for (std::size_t j = 0; j < u.width(); ++j) {
      const Vec2 y = u.cell_centre(i, j);
      const Vec2 x = gamma_inverse(tr, y);
      out(i, j) = x == y ? u(i, j) : u.sample(x);
    }
  }
  return out;
}

TvPushforward tv_pushforward_quadrature(const FunctionalImage& u, const ShiftTransform& tr, const QuadratureSpec& quad) {
  if (u.jump) throw std::invalid_argument("tv_pushforward_quadrature: u carries a jump; use double_lip_gap");
  require_support_inside(tr);
  const LipschitzGraph& g = tr.graph();
  const Vec2 e = g.tangent(), z = g.normal;
  const double s = tr.taper();
  const std::size_t n = quad.nodes;

  // |Du| over the unit square minus the box, as the full integral minus the box part
  double whole = 0.0;
  const double h = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) whole += u.grad({(j + 0.5) * h, (i + 0.5) * h}).norm();
  whole *= h * h;

  TvPushforward out;
  double box_plain = 0.0;
  for_each_node(tr, n, false, [&](double v, double t, double delta, double, double fp, double w) {
    const Vec2 grad = u.grad(g.from_coords(v, t));
    const double gv = grad.dot(e), gt = grad.dot(z);
    const ShiftJet jet = std::abs(v - tr.centre_v()) < tr.radius()
                             ? shift_jet(delta, s, tr.shift(v), tr.shift_slope(v), fp)
                             : ShiftJet{};
    box_plain += w * std::sqrt(gv * gv + gt * gt);
    const double q0 = jet.d * gv - jet.c * gt;
    out.inside += w * std::sqrt(q0 * q0 + gt * gt);
  });
  out.outside = whole - box_plain;
  return out;
}

RegulariserChange regulariser_change(const FunctionalImage& u, const ShiftTransform& tr, const RegulariserSpec& reg,
                                     const QuadratureSpec& quad) {
  reg.validate();
  if (!reg.energy().convex) throw std::invalid_argument("regulariser_change: the energy must be convex");
  require_support_inside(tr);
  require_jump_on_graph(u, tr);
  return change_at(u, tr, reg, quad.nodes);
}

double variation_on_support(const FunctionalImage& u, const ShiftTransform& tr, std::size_t nodes) {
  const LipschitzGraph& g = tr.graph();
  double smooth = 0.0;
  for_each_node(tr, nodes, false, [&](double v, double t, double, double, double, double w) {
    smooth += w * u.grad(g.from_coords(v, t)).norm();
  });
  double jump = 0.0;
  if (u.jump) {
    const double v0 = tr.centre_v(), r = tr.radius();
    jump = composite_gauss(
        [&](double v) {
          const double fp = g.derivative(v);
          return u.jump->magnitude(v) * std::sqrt(1.0 + fp * fp);
        },
        {v0 - r, v0, v0 + r}, 32);
  }
  return smooth + jump;
}

DoubleLipGap double_lip_gap(const FunctionalImage& u, const ShiftTransform& t1, const ShiftTransform& t2,
                            const RegulariserSpec& reg, const QuadratureSpec& quad, std::size_t constant_density) {
  reg.validate();
  if (!reg.energy().convex) throw std::invalid_argument("double_lip_gap: the energy must be convex");
  require_shared_support(t1, t2);
  require_support_inside(t1);
  require_jump_on_graph(u, t1);

  DoubleLipGap out;
  out.lhs_smooth = pair_smooth_change(u, t1, t2, reg, quad.nodes);
  out.lhs_singular = singular_change(u, t1, reg) + singular_change(u, t2, reg);
  out.lhs = out.lhs_smooth + out.lhs_singular;
  if (quad.richardson) {
    const double coarse = pair_smooth_change(u, t1, t2, reg, std::max<std::size_t>(2, quad.nodes / 2));
    out.richardson_delta = std::abs(out.lhs_smooth - coarse);
  }
  out.variation = variation_on_support(u, t1, quad.nodes);
  out.constants = comparison_constants(t1, t2, constant_density);
  out.g_bound = reg.alpha * out.constants.g * out.variation;
  out.t_bound = reg.alpha * out.constants.total() * out.variation;
  auto ratio = [](double lhs, double bound) { return bound > 0.0 ? lhs / bound : (std::abs(lhs) > 1e-14 ? INFINITY : 0.0); };
  out.g_ratio = ratio(out.lhs, out.g_bound);
  out.t_ratio = ratio(out.lhs, out.t_bound);
  if (reg.kind == RegulariserSpec::Kind::TV) out.violation = out.lhs > out.g_bound * (1.0 + 1e-6) + 1e-14;
  else out.violation = out.t_bound == 0.0 && std::abs(out.lhs) > 1e-14;
  return out;
}

Mask support_mask(const GridImage& u, const ShiftTransform& tr) {
  Mask m(u.width(), u.height());
  for (std::size_t i = 0; i < u.height(); ++i)
    for (std::size_t j = 0; j < u.width(); ++j) m.set(i, j, tr.in_support_box(u.cell_centre(i, j)));
  return m;
}

TransportCheck transport_check(const GridImage& u, const ShiftTransform& tr) {
  TransportCheck out;
  const double h2 = u.spacing() * u.spacing();
  for (std::size_t i = 0; i < u.height(); ++i) {
    for (std::size_t j = 0; j < u.width(); ++j) {
      const Vec2 x = u.cell_centre(i, j);
      const Vec2 y = gamma_apply(tr, x);
      if (y != x) out.integral += std::abs(u.sample(y) - u(i, j)) * h2;
    }
  }
  out.bound = max_displacement(tr) * variation_on(u, support_mask(u, tr));
  return out;
}

double bump_integral(const Bump& bump) {
  return composite_gauss([&](double v) { return bump.value(v); }, {-1.0, 0.0, 1.0}, 8);
}

WedgeArea wedge_area(const ShiftTransform& tr, std::size_t raster) {
  if (raster < 2) throw std::invalid_argument("wedge_area: raster must be at least 2");
  WedgeArea out;
  const double r = tr.radius(), v0 = tr.centre_v();
  out.analytic = std::abs(tr.magnitude()) * r * r * bump_integral(tr.bump());
  if (tr.magnitude() == 0.0) return out;

  const LipschitzGraph& g = tr.graph();
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t k = 0; k <= 4 * raster; ++k) {
    const double v = v0 - r + 2.0 * r * k / (4.0 * raster);
    const double f = g.height(v);
    lo = std::min({lo, f, f + tr.shift(v)});
    hi = std::max({hi, f, f + tr.shift(v)});
  }
  const double pad = 0.01 * (hi - lo) + 1e-12;
  lo -= pad;
  hi += pad;
  const double dv = 2.0 * r / raster, dt = (hi - lo) / raster;
  std::size_t count = 0;
  for (std::size_t a = 0; a < raster; ++a) {
    const double v = v0 - r + (a + 0.5) * dv;
    const double f = g.height(v);
    for (std::size_t b = 0; b < raster; ++b) {
      const double t = lo + (b + 0.5) * dt;
      const Vec2 y = g.from_coords(v, t);
      const bool above_image = g.coords(gamma_inverse(tr, y)).y() > f;
      if ((t > f) != above_image) ++count;
    }
  }
  out.pixel_count = static_cast<double>(count) * dv * dt;
  return out;
}

double weighted_graph_area(const LipschitzGraph& graph, const std::function<double(double)>& lambda,
                           const ShiftTransform* shift, std::size_t panels) {
  if (panels == 0) throw std::invalid_argument("weighted_graph_area: panels must be positive");
  const double a = graph.centre_v - graph.domain_radius, b = graph.centre_v + graph.domain_radius;
  std::vector<double> breaks{a, b};
  if (shift) {
    for (double v : {shift->centre_v() - shift->radius(), shift->centre_v(), shift->centre_v() + shift->radius()})
      if (v > a && v < b) breaks.push_back(v);
  }
  return composite_gauss(
      [&](double v) {
        const double slope = graph.derivative(v) + (shift ? shift->shift_slope(v) : 0.0);
        return lambda(v) * std::sqrt(1.0 + slope * slope);
      },
      breaks, panels);
}

}  // namespace tvjump
