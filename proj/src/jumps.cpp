#include "tvjump/jumps.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Dense>

namespace tvjump {

namespace {

struct SideStats {
  double mean = 0.0;
  double spread = 0.0;
};

template <class Get>
SideStats side_stats(Get&& get, std::size_t count) {
  double lo = INFINITY, hi = -INFINITY, sum = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double v = get(k);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  return {sum / static_cast<double>(count), hi - lo};
}

}  // namespace

double default_jump_threshold(const GridImage& u) { return 0.25 * (u.max() - u.min()); }

JumpSet detect_jumps(const GridImage& u, const JumpDetection& params) {
  if (params.window < 1) throw std::invalid_argument("detect_jumps: window must be at least 1");
  if (params.threshold < 0.0) throw std::invalid_argument("detect_jumps: threshold must be positive");
  const double theta = params.threshold > 0.0 ? params.threshold : default_jump_threshold(u);
  JumpSet out;
  out.spacing = u.spacing();
  out.width = u.width();
  out.height = u.height();
  if (!(theta > 0.0)) return out;  // constant image
  const std::size_t w = params.window;
  const double h = u.spacing();

  auto consider = [&](const SideStats& lower, const SideStats& upper, JumpSample s) {
    const double diff = upper.mean - lower.mean;
    if (std::abs(diff) > theta && lower.spread < 0.5 * theta && upper.spread < 0.5 * theta) {
      s.upper = upper.mean;
      s.lower = lower.mean;
      s.magnitude = std::abs(diff);
      out.samples.push_back(s);
    }
  };

  for (std::size_t i = 0; i < u.height(); ++i) {
    for (std::size_t j = 0; j + 1 < u.width(); ++j) {
      const std::size_t nl = std::min(w, j + 1), nu = std::min(w, u.width() - j - 1);
      const SideStats lower = side_stats([&](std::size_t k) { return u(i, j - k); }, nl);
      const SideStats upper = side_stats([&](std::size_t k) { return u(i, j + 1 + k); }, nu);
      JumpSample s;
      s.location = {(j + 1.0) * h, (i + 0.5) * h};
      s.normal = {1.0, 0.0};
      s.row = i;
      s.col = j;
      s.vertical_edge = true;
      consider(lower, upper, s);
    }
  }
  for (std::size_t i = 0; i + 1 < u.height(); ++i) {
    for (std::size_t j = 0; j < u.width(); ++j) {
      const std::size_t nl = std::min(w, i + 1), nu = std::min(w, u.height() - i - 1);
      const SideStats lower = side_stats([&](std::size_t k) { return u(i - k, j); }, nl);
      const SideStats upper = side_stats([&](std::size_t k) { return u(i + 1 + k, j); }, nu);
      JumpSample s;
      s.location = {(j + 0.5) * h, (i + 1.0) * h};
      s.normal = {0.0, 1.0};
      s.row = i;
      s.col = j;
      s.vertical_edge = false;
      consider(lower, upper, s);
    }
  }
  return out;
}

double containment_excess(const JumpSet& ju, const JumpSet& jf, double dilation) {
  if (dilation < 0.0) throw std::invalid_argument("containment_excess: dilation must be nonnegative");
  if (ju.empty()) return 0.0;
  if (ju.width != jf.width || ju.height != jf.height || ju.spacing != jf.spacing)
    throw std::invalid_argument("containment_excess: jump sets come from different grids");
  const double h = ju.spacing;
  const double reach = dilation * h * (1.0 + 1e-9);
  // bucket the reference samples by cell
  std::unordered_map<long long, std::vector<Vec2>> buckets;
  auto key = [&](long long a, long long b) { return a * 1000003LL + b; };
  for (const auto& s : jf.samples)
    buckets[key(static_cast<long long>(std::floor(s.location.y() / h)), static_cast<long long>(std::floor(s.location.x() / h)))]
        .push_back(s.location);
  const long long span = static_cast<long long>(std::ceil(dilation)) + 1;
  std::size_t outside = 0;
  for (const auto& s : ju.samples) {
    const long long bi = static_cast<long long>(std::floor(s.location.y() / h));
    const long long bj = static_cast<long long>(std::floor(s.location.x() / h));
    bool near = false;
    for (long long di = -span; di <= span && !near; ++di) {
      for (long long dj = -span; dj <= span && !near; ++dj) {
        const auto it = buckets.find(key(bi + di, bj + dj));
        if (it == buckets.end()) continue;
        for (const Vec2& p : it->second) {
          if ((p - s.location).norm() <= reach) {
            near = true;
            break;
          }
        }
      }
    }
    if (!near) ++outside;
  }
  // every edge has length h, so the length weighting cancels
  return static_cast<double>(outside) / static_cast<double>(std::max<std::size_t>(1, ju.size()));
}

std::vector<std::vector<Vec2>> extract_contours(const GridImage& u, double level) {
  const std::size_t W = u.width(), H = u.height();
  if (W < 2 || H < 2) return {};
  // node-edge ids: horizontal (i, j)-(i, j+1) -> 2 (i W + j), vertical (i, j)-(i+1, j) -> 2 (i W + j) + 1
  auto hid = [&](std::size_t i, std::size_t j) { return 2 * (i * W + j); };
  auto vid = [&](std::size_t i, std::size_t j) { return 2 * (i * W + j) + 1; };
  auto crossing = [&](std::size_t id) {
    const std::size_t cell = id / 2, i = cell / W, j = cell % W;
    const bool horizontal = id % 2 == 0;
    const double a = u(i, j), b = horizontal ? u(i, j + 1) : u(i + 1, j);
    const double t = (level - a) / (b - a);
    const Vec2 p = u.cell_centre(i, j);
    return horizontal ? Vec2(p.x() + t * u.spacing(), p.y()) : Vec2(p.x(), p.y() + t * u.spacing());
  };

  std::vector<std::pair<std::size_t, std::size_t>> segs;
  for (std::size_t i = 0; i + 1 < H; ++i) {
    for (std::size_t j = 0; j + 1 < W; ++j) {
      const bool a = u(i, j) > level, b = u(i, j + 1) > level, c = u(i + 1, j + 1) > level, d = u(i + 1, j) > level;
      const std::size_t e0 = hid(i, j), e1 = vid(i, j + 1), e2 = hid(i + 1, j), e3 = vid(i, j);
      std::vector<std::size_t> cut;
      if (a != b) cut.push_back(e0);
      if (b != c) cut.push_back(e1);
      if (d != c) cut.push_back(e2);
      if (a != d) cut.push_back(e3);
      if (cut.size() == 2) {
        segs.emplace_back(cut[0], cut[1]);
      } else if (cut.size() == 4) {
        const double centre = 0.25 * (u(i, j) + u(i, j + 1) + u(i + 1, j + 1) + u(i + 1, j));
        if ((centre > level) == a) {
          segs.emplace_back(e0, e1);
          segs.emplace_back(e2, e3);
        } else {
          segs.emplace_back(e0, e3);
          segs.emplace_back(e1, e2);
        }
      }
    }
  }

  std::unordered_map<std::size_t, std::vector<std::size_t>> incident;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    incident[segs[k].first].push_back(k);
    incident[segs[k].second].push_back(k);
  }
  std::vector<char> used(segs.size(), 0);
  std::vector<std::vector<Vec2>> out;
  auto walk = [&](std::size_t start_edge, std::size_t first_seg) {
    std::vector<Vec2> line{crossing(start_edge)};
    std::size_t edge = start_edge, seg = first_seg;
    while (true) {
      used[seg] = 1;
      edge = segs[seg].first == edge ? segs[seg].second : segs[seg].first;
      line.push_back(crossing(edge));
      std::size_t next = segs.size();
      for (std::size_t cand : incident[edge])
        if (!used[cand]) next = cand;
      if (next == segs.size()) break;
      seg = next;
    }
    out.push_back(std::move(line));
  };
  // open chains start at edges with a single incident segment; order keys for determinism
  std::map<std::size_t, std::vector<std::size_t>> ordered(incident.begin(), incident.end());
  for (const auto& [edge, list] : ordered)
    if (list.size() == 1 && !used[list[0]]) walk(edge, list[0]);
  for (std::size_t k = 0; k < segs.size(); ++k)
    if (!used[k]) walk(segs[k].first, k);
  return out;
}

CircleFit fit_circle(std::span<const Vec2> points) {
  const std::size_t n = points.size();
  if (n < 3) throw std::invalid_argument("fit_circle: need at least three points");
  Vec2 mean = Vec2::Zero();
  for (const Vec2& p : points) mean += p;
  mean /= static_cast<double>(n);
  double scale = 0.0;
  for (const Vec2& p : points) scale += (p - mean).squaredNorm();
  scale = std::sqrt(scale / static_cast<double>(n));
  if (!(scale > 0.0)) throw std::invalid_argument("fit_circle: coincident points");

  Eigen::MatrixXd z(n, 4);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 q = (points[k] - mean) / scale;
    z.row(k) << q.squaredNorm(), q.x(), q.y(), 1.0;
  }
  // Pratt fit: minimise |Z a| subject to B^2 + C^2 - 4 A D = 1
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinV);
  const Eigen::Vector4d sv = svd.singularValues();
  const Eigen::Matrix4d v = svd.matrixV();
  Eigen::Vector4d a;
  if (sv(3) < 1e-12 * sv(0)) {
    a = v.col(3);
  } else {
    const Eigen::Matrix4d y = v * sv.asDiagonal() * v.transpose();
    Eigen::Matrix4d n_inv = Eigen::Matrix4d::Zero();
    n_inv(0, 3) = n_inv(3, 0) = -0.5;
    n_inv(1, 1) = n_inv(2, 2) = 1.0;
    const Eigen::Matrix4d q = y * n_inv * y;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(q);
    int pick = -1;
    for (int k = 0; k < 4; ++k) {
      if (eig.eigenvalues()(k) > 0.0 && (pick < 0 || eig.eigenvalues()(k) < eig.eigenvalues()(pick))) pick = k;
    }
    if (pick < 0) pick = 0;
    a = y.fullPivLu().solve(eig.eigenvectors().col(pick));
  }
  const double A = a(0), B = a(1), C = a(2), D = a(3);
  const double disc = B * B + C * C - 4.0 * A * D;
  CircleFit fit;
  fit.curvature = disc > 0.0 ? 2.0 * std::abs(A) / std::sqrt(disc) / scale : 0.0;
  double sq = 0.0;
  if (fit.curvature * scale < 1e-10) {
    fit.curvature = 0.0;
    fit.radius = INFINITY;
    const double nrm = std::hypot(B, C);
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 q = (points[k] - mean) / scale;
      const double dist = (B * q.x() + C * q.y() + D) / nrm * scale;
      sq += dist * dist;
    }
  } else {
    fit.centre = mean + scale * Vec2(-B / (2.0 * A), -C / (2.0 * A));
    fit.radius = 1.0 / fit.curvature;
    for (const Vec2& p : points) {
      const double dist = (p - fit.centre).norm() - fit.radius;
      sq += dist * dist;
    }
  }
  fit.rms_residual = std::sqrt(sq / static_cast<double>(n));
  return fit;
}

CurvatureReport level_line_curvature(const GridImage& u, double level, std::size_t half_window,
                                     const std::optional<std::pair<Vec2, Vec2>>& region) {
  if (half_window < 1) throw std::invalid_argument("level_line_curvature: half_window must be at least 1");
  auto contours = extract_contours(u, level);
  if (contours.empty()) throw std::invalid_argument("level_line_curvature: empty level line");
  const auto longest = std::max_element(contours.begin(), contours.end(),
                                        [](const auto& a, const auto& b) { return a.size() < b.size(); });
  std::vector<Vec2> pts = *longest;
  const bool closed = pts.size() > 2 && (pts.front() - pts.back()).norm() < 1e-14;
  if (closed) pts.pop_back();
  const std::size_t n = pts.size();
  if (n < 3) throw std::invalid_argument("level_line_curvature: level line too short");

  CurvatureReport rep;
  rep.points = pts;
  rep.curvature.resize(n);
  rep.residuals.resize(n);
  std::vector<Vec2> window;
  for (std::size_t k = 0; k < n; ++k) {
    window.clear();
    for (long long o = -static_cast<long long>(half_window); o <= static_cast<long long>(half_window); ++o) {
      long long idx = static_cast<long long>(k) + o;
      if (closed) idx = ((idx % static_cast<long long>(n)) + static_cast<long long>(n)) % static_cast<long long>(n);
      if (idx < 0 || idx >= static_cast<long long>(n)) continue;
      window.push_back(pts[static_cast<std::size_t>(idx)]);
    }
    const CircleFit fit = fit_circle(window);
    rep.curvature[k] = fit.curvature;
    rep.residuals[k] = fit.rms_residual;
  }

  std::vector<Vec2> chosen;
  for (const Vec2& p : pts) {
    if (!region || (p.x() >= region->first.x() && p.x() <= region->second.x() && p.y() >= region->first.y() &&
                    p.y() <= region->second.y()))
      chosen.push_back(p);
  }
  if (chosen.size() >= 3) {
    const CircleFit fit = fit_circle(chosen);
    rep.fitted_radius = fit.radius;
    rep.fitted_centre = fit.centre;
    rep.fit_residual = fit.rms_residual;
  }
  return rep;
}

CornerFit corner_radius(const GridImage& u, double level, const Vec2& corner, const Vec2& inward, double search_radius) {
  if (!(search_radius > 0.0)) throw std::invalid_argument("corner_radius: search_radius must be positive");
  std::vector<Vec2> near;
  for (const auto& line : extract_contours(u, level))
    for (const Vec2& p : line)
      if ((p - corner).norm() <= search_radius) near.push_back(p);
  // closed contours repeat their first point
  std::sort(near.begin(), near.end(), [](const Vec2& a, const Vec2& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
  near.erase(std::unique(near.begin(), near.end()), near.end());

  const Vec2 in(inward.x() > 0.0 ? 1.0 : -1.0, inward.y() > 0.0 ? 1.0 : -1.0);
  std::vector<double> xs, ys;
  for (const Vec2& p : near) {
    const Vec2 q = p - corner;
    if (q.y() * in.y() >= 0.5 * search_radius && std::abs(q.x()) < 0.25 * search_radius) xs.push_back(p.x());
    if (q.x() * in.x() >= 0.5 * search_radius && std::abs(q.y()) < 0.25 * search_radius) ys.push_back(p.y());
  }
  if (xs.empty() || ys.empty()) throw std::invalid_argument("corner_radius: edges not found near the corner");
  auto median = [](std::vector<double>& v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  CornerFit res;
  res.edges = {median(xs), median(ys)};

  auto centre_of = [&](double r) { return Vec2(res.edges.x() + r * in.x(), res.edges.y() + r * in.y()); };
  double radius = 0.25 * search_radius;
  std::vector<Vec2> selected;
  for (res.iterations = 1; res.iterations <= 50; ++res.iterations) {
    std::vector<Vec2> next;
    const Vec2 c = centre_of(radius);
    for (const Vec2& p : near) {
      const Vec2 q = p - c;
      if (q.x() * in.x() < 0.0 && q.y() * in.y() < 0.0) next.push_back(p);
    }
    if (next.empty() || next == selected) break;
    selected = std::move(next);
    // Gauss-Newton on the single unknown
    for (int g = 0; g < 50; ++g) {
      const Vec2 cc = centre_of(radius);
      double num = 0.0, den = 0.0;
      for (const Vec2& p : selected) {
        const Vec2 q = p - cc;
        const double d = q.norm();
        const double dr = -(q.x() * in.x() + q.y() * in.y()) / d - 1.0;
        num += (d - radius) * dr;
        den += dr * dr;
      }
      if (den == 0.0) break;
      const double step = num / den;
      radius -= step;
      if (std::abs(step) <= 1e-14 * std::abs(radius)) break;
    }
  }
  if (selected.size() < 2 || !(radius > 0.0)) throw std::invalid_argument("corner_radius: no rounded corner found");
  res.radius = radius;
  res.centre = centre_of(radius);
  res.points = selected.size();
  double sq = 0.0;
  for (const Vec2& p : selected) {
    const double d = (p - res.centre).norm() - radius;
    sq += d * d;
  }
  res.rms_residual = std::sqrt(sq / static_cast<double>(selected.size()));
  if (selected.size() >= 3) res.free_circle = fit_circle(selected);
  return res;
}

std::vector<double> mean_curvature_of_graph(std::span<const double> f, double spacing) {
  if (f.size() < 5) throw std::invalid_argument("mean_curvature_of_graph: need at least five samples");
  if (!(spacing > 0.0)) throw std::invalid_argument("mean_curvature_of_graph: spacing must be positive");
  auto flux = [&](std::size_t k) {
    const double s = (f[k + 1] - f[k]) / spacing;
    return s / std::sqrt(1.0 + s * s);
  };
  std::vector<double> out(f.size() - 2);
  for (std::size_t k = 1; k + 1 < f.size(); ++k) out[k - 1] = -(flux(k) - flux(k - 1)) / spacing;
  return out;
}

RCurvature r_curvature_estimate(const FunctionalImage& u, const LipschitzGraph& graph, double centre_v,
                                const Bump& bump, double radius, double rho, const RegulariserSpec& reg,
                                const QuadratureSpec& quad) {
  if (!(rho > 0.0)) throw std::invalid_argument("r_curvature_estimate: rho must be positive");
  const ShiftTransform plus(graph, centre_v, radius, rho, bump);
  const ShiftTransform minus = plus.with_magnitude(-rho);
  QuadratureSpec q = quad;
  q.richardson = false;
  const double up = regulariser_change(u, plus, reg, q).total();
  const double down = regulariser_change(u, minus, reg, q).total();
  RCurvature out;
  out.bump_mass = radius * radius * bump_integral(bump);
  out.rho = rho;
  out.radius = radius;
  out.forward = up / (rho * out.bump_mass);
  out.backward = -down / (rho * out.bump_mass);
  out.estimate = (up - down) / (2.0 * rho * out.bump_mass);
  return out;
}

}  // namespace tvjump
