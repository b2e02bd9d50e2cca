#include "tvjump/shift.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tvjump/linalg2.hpp"

namespace tvjump {

namespace {

constexpr double kDiffStep = 1e-6;

double central_difference(const std::function<double(double)>& f, double x) {
  return (f(x + kDiffStep) - f(x - kDiffStep)) / (2.0 * kDiffStep);
}

/// Q = [e z] maps graph coordinates to world coordinates.
Mat2 frame(const LipschitzGraph& g) {
  Mat2 q;
  q.col(0) = g.tangent();
  q.col(1) = g.normal;
  return q;
}

Mat2 local_grad(const ShiftJet& jet) {
  Mat2 l;
  l << 1.0, 0.0, jet.c, jet.d;
  return l;
}

Mat2 to_world(const LipschitzGraph& g, const Mat2& local) {
  const Mat2 q = frame(g);
  return q * local * q.transpose();
}

}  // namespace

double LipschitzGraph::derivative(double v) const { return slope ? slope(v) : central_difference(height, v); }

void LipschitzGraph::validate() const {
  if (std::abs(normal.norm() - 1.0) > 1e-12) throw std::invalid_argument("LipschitzGraph: normal must be a unit vector");
  if (!height) throw std::invalid_argument("LipschitzGraph: missing height function");
  if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz))
    throw std::invalid_argument("LipschitzGraph: Lipschitz bound must be finite and nonnegative");
  if (!(domain_radius > 0.0)) throw std::invalid_argument("LipschitzGraph: empty domain");
}

LipschitzGraph flat_graph(double level) {
  LipschitzGraph g;
  g.height = [level](double) { return level; };
  g.slope = [](double) { return 0.0; };
  g.lipschitz = 0.0;
  g.centre_v = 0.5;
  g.domain_radius = 0.5;
  g.name = "flat";
  return g;
}

LipschitzGraph circle_arc_graph(const Vec2& centre, double radius, double half_width) {
  if (!(radius > 0.0) || !(half_width > 0.0) || half_width >= radius)
    throw std::invalid_argument("circle_arc_graph: need 0 < half_width < radius");
  LipschitzGraph g;
  const double cx = centre.x(), cy = centre.y();
  g.height = [=](double v) {
    const double dv = v - cx;
    return cy + std::sqrt(std::max(0.0, radius * radius - dv * dv));
  };
  g.slope = [=](double v) {
    const double dv = v - cx;
    return -dv / std::sqrt(radius * radius - dv * dv);
  };
  g.lipschitz = half_width / std::sqrt(radius * radius - half_width * half_width);
  g.centre_v = cx;
  g.domain_radius = half_width;
  g.name = "circle";
  return g;
}

double sampled_lipschitz(const LipschitzGraph& graph, std::size_t samples) {
  if (samples < 2) throw std::invalid_argument("sampled_lipschitz: need at least two samples");
  std::vector<double> v(samples), f(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    v[k] = graph.centre_v - graph.domain_radius + 2.0 * graph.domain_radius * k / (samples - 1);
    f[k] = graph.height(v[k]);
  }
  double best = 0.0;
  const std::size_t stride = std::max<std::size_t>(1, samples / 64);
  for (std::size_t a = 0; a < samples; ++a) {
    for (std::size_t b = a + 1; b < samples; b += (b == a + 1 ? 1 : stride)) {
      best = std::max(best, std::abs(f[b] - f[a]) / (v[b] - v[a]));
    }
  }
  return best;
}

double Bump::derivative(double v) const { return slope ? slope(v) : central_difference(value, v); }

double standard_bump(double v) { return std::max(0.0, 1.0 - std::abs(v)); }

Bump standard_bump_profile() {
  Bump b;
  b.value = standard_bump;
  b.slope = [](double v) {
    if (v == 0.0 || std::abs(v) >= 1.0) return 0.0;
    return v > 0.0 ? -1.0 : 1.0;
  };
  b.sup = 1.0;
  b.name = "standard";
  return b;
}

ShiftTransform::ShiftTransform(LipschitzGraph graph, double centre_v, double radius, double magnitude, Bump bump)
    : graph_(std::move(graph)), bump_(std::move(bump)), v0_(centre_v), r_(radius), rho_(magnitude) {
  graph_.validate();
  if (!(r_ > 0.0)) throw std::invalid_argument("ShiftTransform: radius must be positive");
  if (!(std::abs(rho_) < 1.0)) throw std::invalid_argument("ShiftTransform: magnitude must lie in (-1, 1)");
  if (!bump_.value) throw std::invalid_argument("ShiftTransform: missing bump profile");
  if (bump_.sup > 1.0 + 1e-12) throw std::invalid_argument("ShiftTransform: bump must satisfy |bump| <= 1");
  if (std::abs(v0_ - graph_.centre_v) + r_ > graph_.domain_radius * (1.0 + 1e-12))
    throw std::invalid_argument("ShiftTransform: bump support leaves the graph domain");
}

double ShiftTransform::shift(double v) const {
  const double u = (v - v0_) / r_;
  if (std::abs(u) >= 1.0) return 0.0;
  return rho_ * r_ * bump_.value(u);
}

double ShiftTransform::shift_slope(double v) const {
  const double u = (v - v0_) / r_;
  if (std::abs(u) >= 1.0) return 0.0;
  return rho_ * bump_.derivative(u);
}

bool ShiftTransform::in_support_box(const Vec2& x) const {
  const Vec2 vt = graph_.coords(x);
  return std::abs(vt.x() - v0_) < r_ && std::abs(vt.y() - graph_.height(v0_)) < box_half_height();
}

ShiftTransform ShiftTransform::with_magnitude(double magnitude) const {
  return ShiftTransform(graph_, v0_, r_, magnitude, bump_);
}

ShiftJet shift_jet(double delta, double s, double h, double h_slope, double f_slope) {
  ShiftJet jet;
  if (delta < -s || delta >= s || (h == 0.0 && h_slope == 0.0)) return jet;
  if (delta <= 0.0) {
    jet.branch = ShiftJet::Branch::Lower;
    jet.d = 1.0 + h / s;
    jet.c = (s + delta) / s * h_slope - f_slope * h / s;
  } else {
    jet.branch = ShiftJet::Branch::Upper;
    jet.d = 1.0 - h / s;
    jet.c = (s - delta) / s * h_slope + f_slope * h / s;
  }
  return jet;
}

ShiftJet shift_jet(const ShiftTransform& tr, const Vec2& x) {
  const LipschitzGraph& g = tr.graph();
  const Vec2 vt = g.coords(x);
  const double v = vt.x();
  if (std::abs(v - tr.centre_v()) >= tr.radius() || tr.magnitude() == 0.0) return {};
  const double f = g.height(v);
  return shift_jet(vt.y() - f, tr.taper(), tr.shift(v), tr.shift_slope(v), g.derivative(v));
}

Vec2 gamma_apply(const ShiftTransform& tr, const Vec2& x) {
  const LipschitzGraph& g = tr.graph();
  const Vec2 vt = g.coords(x);
  const double v = vt.x();
  if (std::abs(v - tr.centre_v()) >= tr.radius()) return x;
  const double s = tr.taper();
  const double f = g.height(v);
  const double delta = vt.y() - f;
  if (std::abs(delta) >= s) return x;
  const double moved = (1.0 - std::abs(delta) / s) * tr.shift(v);
  return x + moved * g.normal;
}

Vec2 gamma_inverse(const ShiftTransform& tr, const Vec2& y) {
  const LipschitzGraph& g = tr.graph();
  const Vec2 vt = g.coords(y);
  const double v = vt.x();
  if (std::abs(v - tr.centre_v()) >= tr.radius()) return y;
  const double s = tr.taper();
  const double f = g.height(v);
  const double h = tr.shift(v);
  const double e = vt.y() - f;  // image offset from the graph
  if (e <= -s || e >= s) return y;
  // the graph point moves to offset h; below it the lower branch applies
  const double delta = e <= h ? (e - h) / (1.0 + h / s) : (e - h) / (1.0 - h / s);
  return y + (delta - e) * g.normal;
}

Mat2 gamma_grad(const ShiftTransform& tr, const Vec2& x) { return to_world(tr.graph(), local_grad(shift_jet(tr, x))); }

Mat2 inverse_grad(const ShiftTransform& tr, const Vec2& x) {
  const ShiftJet jet = shift_jet(tr, x);
  Mat2 l;
  l << 1.0, 0.0, -jet.c / jet.d, 1.0 / jet.d;
  return to_world(tr.graph(), l);
}

double jacobian_det(const ShiftTransform& tr, const Vec2& x) { return std::abs(shift_jet(tr, x).d); }

Mat2 lipjac_matrix(const ShiftTransform& tr, const Vec2& x) {
  const ShiftJet jet = shift_jet(tr, x);
  Mat2 w;
  // d >= 2/3 since |rho h_r| < s / 3
  w << jet.d, 0.0, -jet.c, 1.0;
  return to_world(tr.graph(), w);
}

EigenPair eigenvalues_gradgram(double c, double d) {
  const double b = 1.0 + d * d + c * c;
  const double root = std::sqrt(std::max(0.0, b * b - 4.0 * d * d));
  const double large = 0.5 * (b + root);
  // product of the eigenvalues is d^2; dividing avoids cancellation
  return {large > 0.0 ? d * d / large : 0.0, large};
}

namespace {

/// Sample points of a transform's support box, in world coordinates.
std::vector<Vec2> support_samples(const ShiftTransform& tr, std::size_t density) {
  const LipschitzGraph& g = tr.graph();
  const double r = tr.radius(), v0 = tr.centre_v(), s = tr.taper();
  const double t0 = g.height(v0), half = tr.box_half_height();
  const double belt = 1e-4 * r;

  std::vector<double> vs;
  for (std::size_t k = 0; k < density; ++k) vs.push_back(v0 - r + (2.0 * k + 1.0) * r / density);
  for (double off : {1e-3, 1e-2, 3e-2, 0.1}) {
    vs.push_back(v0 - off * r);
    vs.push_back(v0 + off * r);
  }
  std::erase_if(vs, [&](double v) { return std::abs(v - v0) < belt || std::abs(v - v0) > r - belt; });

  std::vector<Vec2> pts;
  pts.reserve(vs.size() * (density + 6));
  for (double v : vs) {
    const double f = g.height(v);
    for (std::size_t k = 0; k < density; ++k)
      pts.push_back(g.from_coords(v, t0 - half + (2.0 * k + 1.0) * half / density));
    const double tiny = 1e-9 * s;
    for (double t : {f, f + tiny, f - s, f - s + tiny, f + s - tiny, f + 0.5 * s, f - 0.5 * s})
      pts.push_back(g.from_coords(v, t));
  }
  return pts;
}

}  // namespace

ComparisonConstants comparison_constants(const ShiftTransform& t1, const ShiftTransform& t2, std::size_t density) {
  if (density < 2) throw std::invalid_argument("comparison_constants: density must be at least 2");
  std::vector<Vec2> pts = support_samples(t1, density);
  const std::vector<Vec2> more = support_samples(t2, density);
  pts.insert(pts.end(), more.begin(), more.end());

  ComparisonConstants out;
  out.samples = pts.size();
  const Mat2 id = Mat2::Identity();
  for (const Vec2& x : pts) {
    const Mat2 w1 = lipjac_matrix(t1, x), w2 = lipjac_matrix(t2, x);
    out.g = std::max(out.g, sup_pair_excess(w1, w2));
    out.g_upper = std::max(out.g_upper, biestim_upper(w1, w2));
    out.j = std::max(out.j, std::abs(jacobian_det(t1, x) + jacobian_det(t2, x) - 2.0));
    out.d1 = std::max(out.d1, spectral_norm(inverse_grad(t1, x) - id));
    out.d2 = std::max(out.d2, spectral_norm(inverse_grad(t2, x) - id));
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("loglog_slope: size mismatch");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) continue;
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 3) throw std::invalid_argument("loglog_slope: fewer than three positive points");
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw std::invalid_argument("loglog_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

ScalingSweep scaling_sweep(const LipschitzGraph& graph, double centre_v, double radius, const Bump& bump,
                           const std::vector<double>& rhos, std::size_t density) {
  if (!std::is_sorted(rhos.begin(), rhos.end())) throw std::invalid_argument("scaling_sweep: rho list must be ascending");
  ScalingSweep out;
  const ShiftTransform identity(graph, centre_v, radius, 0.0, bump);
  std::vector<double> xs, pair_t, ident_t;
  for (double rho : rhos) {
    if (rho < 0.0) throw std::invalid_argument("scaling_sweep: rho must be nonnegative");
    const ShiftTransform plus(graph, centre_v, radius, rho, bump);
    SweepRow row;
    row.rho = rho;
    row.pair = comparison_constants(plus, plus.with_magnitude(-rho), density);
    row.identity = comparison_constants(plus, identity, density);
    xs.push_back(rho);
    pair_t.push_back(row.pair.total());
    ident_t.push_back(row.identity.total());
    out.rows.push_back(row);
  }
  out.pair_slope = loglog_slope(xs, pair_t);
  out.identity_slope = loglog_slope(xs, ident_t);
  return out;
}

double max_displacement(const ShiftTransform& tr) { return std::abs(tr.magnitude()) * tr.radius() * tr.bump().sup; }

double sampled_displacement(const ShiftTransform& tr, std::size_t density) {
  if (density < 2) throw std::invalid_argument("sampled_displacement: density must be at least 2");
  const LipschitzGraph& g = tr.graph();
  const double r = tr.radius(), v0 = tr.centre_v(), half = tr.box_half_height(), t0 = g.height(v0);
  double best = 0.0;
  for (std::size_t a = 0; a <= density + 1; ++a) {
    const double v = a > density ? v0 : v0 - r + 2.0 * r * a / density;
    const double f = g.height(v);
    best = std::max(best, (gamma_apply(tr, g.from_coords(v, f)) - g.from_coords(v, f)).norm());
    for (std::size_t b = 0; b <= density; ++b) {
      const Vec2 x = g.from_coords(v, t0 - half + 2.0 * half * b / density);
      best = std::max(best, (gamma_apply(tr, x) - x).norm());
    }
  }
  return best;
}

}  // namespace tvjump
