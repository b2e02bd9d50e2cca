#include "tvjump/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <random>
#include <stdexcept>

#include <Eigen/LU>

#include "tvjump/image_io.hpp"
#include "tvjump/jumps.hpp"
#include "tvjump/linalg2.hpp"
#include "tvjump/plot.hpp"
#include "tvjump/pushforward.hpp"
#include "tvjump/shift.hpp"
#include "tvjump/solver.hpp"

namespace tvjump {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Report plumbing

bool Report::passed() const {
  if (metrics.empty()) return false;
  return std::all_of(metrics.begin(), metrics.end(), [](const Metric& m) { return m.pass; });
}

json Report::to_json() const {
  json ms = json::array();
  for (const auto& m : metrics) {
    json j = {{"name", m.name}, {"pass", m.pass}};
    if (std::isfinite(m.value)) j["value"] = m.value;
    else j["value"] = std::isnan(m.value) ? "nan" : (m.value > 0 ? "inf" : "-inf");
    if (!std::isnan(m.lo)) j["lo"] = m.lo;
    if (!std::isnan(m.hi)) j["hi"] = m.hi;
    if (!m.error.empty()) j["error"] = m.error;
    ms.push_back(std::move(j));
  }
  json out = {{"scenario", scenario},     {"criterion", criterion}, {"description", description},
              {"pass", passed()},         {"metrics", ms},          {"environment", environment},
              {"artifacts", artifacts}};
  if (!errors.empty()) out["errors"] = errors;
  return out;
}

Metric& Report::check(const std::string& name, double value, double lo, double hi) {
  Metric m;
  m.name = name;
  m.value = value;
  m.lo = lo;
  m.hi = hi;
  m.pass = !std::isnan(value) && (std::isnan(lo) || value >= lo) && (std::isnan(hi) || value <= hi);
  metrics.push_back(std::move(m));
  return metrics.back();
}

void Report::measure(const std::string& name, double lo, double hi, const std::function<double()>& compute) {
  try {
    check(name, compute(), lo, hi);
  } catch (const std::exception& e) {
    Metric& m = check(name, NAN, lo, hi);
    m.pass = false;
    m.error = e.what();
  }
}

ArtifactWriter::ArtifactWriter(const RunOptions& opts, Report& report, std::string prefix)
    : opts_(opts), report_(report), prefix_(std::move(prefix)) {}

void ArtifactWriter::emit(const std::string& name, const std::function<void(const fs::path&)>& write) {
  if (!enabled()) return;
  const std::string file = prefix_ + "_" + name;
  const fs::path target = opts_.out_dir / file;
  try {
    fs::create_directories(opts_.out_dir);
    if (fs::exists(target) && !opts_.force) {
      report_.errors.push_back(file + ": exists, not overwritten (use --force)");
      return;
    }
    write(target);
    report_.artifacts.push_back(file);
  } catch (const std::exception& e) {
    report_.errors.push_back(file + ": " + e.what());
  }
}

void Scenario::validate() const {
  if (name.empty()) throw std::invalid_argument("scenario without a name");
  if (!run) throw std::invalid_argument("scenario '" + name + "' has no pipeline");
  if (phantom) phantom->validate();
  for (const auto& m : models) {
    m.fidelity.validate();
    m.regulariser.validate();
  }
}

namespace {

// ---------------------------------------------------------------------------
// Shared helpers

using Row = std::vector<double>;

void write_table(const fs::path& path, const std::vector<std::string>& header, const std::vector<Row>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  char buf[40];
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", r[k]);
      out << (k ? "," : "") << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::size_t grid_size(const Scenario& s, const RunOptions& opts) {
  return opts.resolution > 0 ? opts.resolution : s.resolution;
}

std::uint64_t scenario_seed(const Scenario& s, const RunOptions& opts) { return s.seed + opts.seed; }

json model_json(const ModelSpec& m) {
  try {
    return to_json(m.fidelity, m.regulariser);
  } catch (const std::exception&) {
    return {{"regulariser", m.regulariser.psi.name}};
  }
}

/// A transform configuration by name, shared by several criteria.
struct ShiftCase {
  std::string name;
  LipschitzGraph graph;
  double centre_v;
  double radius;
};

ShiftCase flat_case() { return {"flat", flat_graph(0.5), 0.5, 0.1}; }
ShiftCase circle_case() { return {"circle", circle_arc_graph({0.5, 0.2}, 0.5, 0.3), 0.55, 0.1}; }

/// True when x is within `margin` of one of the lines where the transform
/// is not differentiable (bump kinks, graph, taper ends).
bool near_kink(const ShiftTransform& tr, const Vec2& x, double margin) {
  const LipschitzGraph& g = tr.graph();
  const Vec2 vt = g.coords(x);
  const double v = vt.x(), delta = vt.y() - g.height(v);
  const double v0 = tr.centre_v(), r = tr.radius(), s = tr.taper();
  for (double k : {v0 - r, v0, v0 + r})
    if (std::abs(v - k) < margin) return true;
  for (double k : {-s, 0.0, s})
    if (std::abs(delta - k) < margin) return true;
  return false;
}

Vec2 sample_support(const ShiftTransform& tr, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const LipschitzGraph& g = tr.graph();
  const double v = tr.centre_v() + tr.radius() * unit(rng);
  const double t = g.height(tr.centre_v()) + tr.box_half_height() * unit(rng);
  return g.from_coords(v, t);
}

/// Smooth random test image: three Gaussians with seeded parameters.
FunctionalImage random_smooth_image(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> centre(0.2, 0.8), width(0.05, 0.2), amp(-1.0, 1.0);
  std::vector<FunctionalImage> parts;
  for (int k = 0; k < 3; ++k) parts.push_back(gaussian_image({centre(rng), centre(rng)}, width(rng), amp(rng)));
  FunctionalImage u;
  u.name = "random-smooth";
  u.value = [parts](const Vec2& x) {
    double s = 0.0;
    for (const auto& p : parts) s += p.value(x);
    return s;
  };
  u.gradient = [parts](const Vec2& x) {
    Vec2 g = Vec2::Zero();
    for (const auto& p : parts) g += p.grad(x);
    return g;
  };
  return u;
}

struct GapCase {
  std::string name;
  FunctionalImage image;
  LipschitzGraph graph;
  double centre_v;
};

std::vector<GapCase> gap_cases() {
  const LipschitzGraph flat = flat_graph(0.5);
  const LipschitzGraph circ = circle_arc_graph({0.5, 0.3}, 0.3, 0.2);
  return {{"smooth", gaussian_image({0.52, 0.47}, 0.15), flat, 0.5},
          {"jump-flat", graph_jump_image(flat, 1.0, 0.0, gaussian_image({0.5, 0.5}, 0.2, 0.3)), flat, 0.5},
          {"jump-circle", disk_jump_image({0.5, 0.3}, 0.3, 1.0, 0.0, 0.2), circ, 0.52}};
}

constexpr double kGapRadius = 0.05;

// ---------------------------------------------------------------------------
// Criterion 1

void run_jacobian(const Scenario& s, const RunOptions& opts, Report& rep, ArtifactWriter& out) {
  const std::size_t points = 1000;
  const double step = 1e-6;
  std::vector<Row> rows;
  for (const ShiftCase& c : {flat_case(), circle_case()}) {
    const ShiftTransform tr(c.graph, c.centre_v, c.radius, 0.3);
    std::mt19937_64 rng(scenario_seed(s, opts));
    double worst = 0.0;
    std::size_t skipped = 0, used = 0;
    while (used < points) {
      const Vec2 x = sample_support(tr, rng);
      // the finite-difference stencil must not straddle a kink
      if (near_kink(tr, x, 10.0 * step)) {
        ++skipped;
        continue;
      }
      Mat2 fd;
      for (int col = 0; col < 2; ++col) {
        Vec2 d = Vec2::Zero();
        d[col] = step;
        fd.col(col) = (gamma_apply(tr, x + d) - gamma_apply(tr, x - d)) / (2.0 * step);
      }
      const double exact = jacobian_det(tr, x);
      const double err = rel_diff(fd.determinant(), exact);
      worst = std::max(worst, err);
      rows.push_back({static_cast<double>(rows.size()), x.x(), x.y(), exact, fd.determinant(), err});
      ++used;
    }
    rep.at_most(c.name + ".max_relative_error", worst, 1e-5);
    rep.environment["excluded_near_kinks"][c.name] = skipped;
  }
  rep.environment["points_per_graph"] = points;
  rep.environment["fd_step"] = step;
  out.emit("points.csv", [&](const fs::path& p) { write_table(p, {"k", "x", "y", "det", "det_fd", "rel_err"}, rows); });
}

// ---------------------------------------------------------------------------
// Criterion 2

void run_pair_jacobian(const Scenario&, const RunOptions&, Report& rep, ArtifactWriter& out) {
  std::vector<Row> rows;
  double worst = 0.0;
  for (const ShiftCase& c : {flat_case(), circle_case()}) {
    for (double rho : {0.3, 0.1, 0.01, 0.001}) {
      const ShiftTransform tr(c.graph, c.centre_v, c.radius, rho);
      const ComparisonConstants k = comparison_constants(tr, tr.with_magnitude(-rho), 128);
      worst = std::max(worst, k.j);
      rows.push_back({rho, k.j, static_cast<double>(k.samples)});
    }
  }
  rep.at_most("max_pair_jacobian", worst, 1e-14);
  rep.environment["density"] = 128;
  out.emit("pair_jacobian.csv", [&](const fs::path& p) { write_table(p, {"rho", "J", "samples"}, rows); });
}

// ---------------------------------------------------------------------------
// Criterion 3

void run_scaling(const Scenario&, const RunOptions&, Report& rep, ArtifactWriter& out) {
  std::vector<double> rhos;
  for (int k = 10; k >= 3; --k) rhos.push_back(std::ldexp(1.0, -k));
  for (const ShiftCase& c : {flat_case(), circle_case()}) {
    const ScalingSweep sw = scaling_sweep(c.graph, c.centre_v, c.radius, standard_bump_profile(), rhos, 64);
    rep.check(c.name + ".pair_slope", sw.pair_slope, 1.9, 2.1);
    rep.check(c.name + ".identity_slope", sw.identity_slope, 0.9, 1.1);
    std::vector<Row> rows;
    plot::Series pair{"T PAIR", {}, {}}, ident{"T IDENTITY", {}, {}};
    for (const auto& r : sw.rows) {
      rows.push_back({r.rho, r.pair.g, r.pair.j, r.pair.d1, r.pair.d2, r.pair.total(), r.identity.g, r.identity.j,
                      r.identity.d1, r.identity.total()});
      pair.x.push_back(r.rho), pair.y.push_back(r.pair.total());
      ident.x.push_back(r.rho), ident.y.push_back(r.identity.total());
    }
    out.emit(c.name + "_sweep.csv", [&](const fs::path& p) {
      write_table(p, {"rho", "G", "J", "D1", "D2", "T", "G_id", "J_id", "D_id", "T_id"}, rows);
    });
    if (out.plots())
      out.emit(c.name + "_sweep.png", [&](const fs::path& p) { plot::loglog_plot(p, {pair, ident}, "T VS RHO " + c.name); });

    double disp = 0.0;
    for (double rho : {0.3, -0.05, 0.01}) {
      const ShiftTransform tr(c.graph, c.centre_v, c.radius, rho);
      disp = std::max({disp, rel_diff(sampled_displacement(tr), std::abs(rho) * c.radius),
                       rel_diff(max_displacement(tr), std::abs(rho) * c.radius)});
    }
    rep.at_most(c.name + ".displacement_relative_error", disp, 1e-3);
  }
  rep.environment["rhos"] = rhos;
  rep.environment["density"] = 64;
}

// ---------------------------------------------------------------------------
// Criterion 4

void run_biestim(const Scenario& s, const RunOptions& opts, Report& rep, ArtifactWriter& out) {
  std::mt19937_64 rng(scenario_seed(s, opts));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> expo(-4.0, -0.3);
  std::size_t violations = 0, pairs = 0;
  double worst = -INFINITY;
  auto test = [&](const Mat2& a, const Mat2& b) {
    const double excess = sup_pair_excess(a, b) - biestim_upper(a, b);
    worst = std::max(worst, excess);
    if (excess > 1e-12) ++violations;
    ++pairs;
  };
  for (int k = 0; k < 10000; ++k) {
    Mat2 m[2];
    for (auto& w : m) {
      const double eps = std::pow(10.0, expo(rng));
      w << 1.0 + eps * gauss(rng), eps * gauss(rng), eps * gauss(rng), 1.0 + eps * gauss(rng);
    }
    test(m[0], m[1]);
  }
  const std::size_t random_pairs = pairs;
  for (const ShiftCase& c : {flat_case(), circle_case()}) {
    for (double rho : {0.3, 0.05, 0.005}) {
      const ShiftTransform tp(c.graph, c.centre_v, c.radius, rho), tm = tp.with_magnitude(-rho);
      const std::size_t n = 48;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double v = c.centre_v + c.radius * (-1.0 + (2.0 * static_cast<double>(j) + 1.0) / n);
          const double t = c.graph.height(c.centre_v) + tp.box_half_height() * (-1.0 + (2.0 * static_cast<double>(i) + 1.0) / n);
          const Vec2 x = c.graph.from_coords(v, t);
          const Mat2 w1 = lipjac_matrix(tp, x);
          test(w1, lipjac_matrix(tm, x));
          test(w1, Mat2::Identity());
        }
      }
    }
  }
  rep.at_most("violations", static_cast<double>(violations), 0.0);
  rep.check("max_excess_over_bound", worst, NAN, NAN);
  rep.environment["random_pairs"] = random_pairs;
  rep.environment["shift_pairs"] = pairs - random_pairs;
  out.emit("summary.csv", [&](const fs::path& p) {
    write_table(p, {"pairs", "violations", "max_excess"}, {{static_cast<double>(pairs), static_cast<double>(violations), worst}});
  });
}

// ---------------------------------------------------------------------------
// Criterion 5

void run_double_lip(const Scenario& s, const RunOptions&, Report& rep, ArtifactWriter& out) {
  const RegulariserSpec& reg = s.models.at(0).regulariser;
  std::vector<Row> rows;
  std::vector<plot::Series> series;
  for (const GapCase& c : gap_cases()) {
    double worst = 0.0;
    plot::Series ser{c.name, {}, {}};
    for (double rho : {0.1, 0.01, 0.001}) {
      const ShiftTransform tr(c.graph, c.centre_v, kGapRadius, rho);
      const DoubleLipGap g = double_lip_gap(c.image, tr, tr.with_magnitude(-rho), reg);
      worst = std::max(worst, g.g_ratio);
      rows.push_back({static_cast<double>(series.size()), rho, g.lhs, g.lhs_smooth, g.lhs_singular, g.variation,
                      g.constants.g, g.g_bound, g.g_ratio, g.richardson_delta});
      ser.x.push_back(rho), ser.y.push_back(g.lhs);
    }
    rep.at_most(c.name + ".lhs_over_bound", worst, 1.0 + 1e-6);
    rep.measure(c.name + ".two_point_ratio", 3.5, 4.5, [&] {
      const ShiftTransform a(c.graph, c.centre_v, kGapRadius, 0.01), b = a.with_magnitude(0.005);
      const double la = double_lip_gap(c.image, a, a.with_magnitude(-0.01), reg).lhs;
      const double lb = double_lip_gap(c.image, b, b.with_magnitude(-0.005), reg).lhs;
      return la / lb;
    });
    series.push_back(std::move(ser));
  }
  rep.environment["radius"] = kGapRadius;
  rep.environment["model"] = model_json(s.models.at(0));
  out.emit("gaps.csv", [&](const fs::path& p) {
    write_table(p, {"case", "rho", "lhs", "lhs_smooth", "lhs_singular", "variation", "G", "g_bound", "ratio", "richardson"},
                rows);
  });
  if (out.plots()) out.emit("gaps.png", [&](const fs::path& p) { plot::loglog_plot(p, series, "DOUBLE-LIP GAP VS RHO"); });
}

// ---------------------------------------------------------------------------
// Criterion 6

void run_huber(const Scenario& s, const RunOptions& opts, Report& rep, ArtifactWriter& out) {
  std::mt19937_64 rng(scenario_seed(s, opts));
  std::uniform_real_distribution<double> unit(0.0, 1.0), wide(-3.0, 3.0);
  for (double eta : {0.1, 1.0, 10.0}) {
    const EnergyPsi psi = huber_psi(eta);
    const double k = 1.0 / eta;
    std::vector<PsiSamplePair> pairs;
    pairs.reserve(100000);
    for (int n = 0; n < 100000; ++n) {
      switch (n % 3) {
        case 0: pairs.push_back({k * std::pow(10.0, wide(rng)), k * std::pow(10.0, wide(rng))}); break;
        case 1: pairs.push_back({3.0 * k * unit(rng), 3.0 * k * unit(rng)}); break;
        default: pairs.push_back({k * (1.0 - 0.1 * unit(rng)), k * (1.0 + 0.1 * unit(rng))}); break;
      }
    }
    char label[32];
    std::snprintf(label, sizeof label, "eta_%g", eta);
    rep.check(std::string(label) + ".psi_constants", std::abs(psi.threshold - k) + std::abs(psi.coco_bound - eta), NAN, 0.0);
    rep.at_most(std::string(label) + ".violations", static_cast<double>(check_psi_membership(psi, pairs).size()), 0.0);
  }

  const RegulariserSpec& reg = s.models.at(0).regulariser;
  std::vector<Row> rows;
  const auto cases = gap_cases();
  for (std::size_t n = 0; n < 2; ++n) {
    const GapCase& c = cases[n];
    double lo = INFINITY, hi = 0.0;
    for (double rho : {0.1, 0.03, 0.01, 0.003, 0.001}) {
      const ShiftTransform tr(c.graph, c.centre_v, kGapRadius, rho);
      const DoubleLipGap g = double_lip_gap(c.image, tr, tr.with_magnitude(-rho), reg);
      lo = std::min(lo, g.t_ratio);
      hi = std::max(hi, g.t_ratio);
      rows.push_back({static_cast<double>(n), rho, g.lhs, g.t_bound, g.t_ratio});
    }
    rep.at_most(c.name + ".constant_spread", lo > 0.0 ? hi / lo : INFINITY, 2.0);
    rep.check(c.name + ".constant_min", lo, NAN, NAN);
  }
  rep.environment["samples_per_eta"] = 100000;
  rep.environment["model"] = model_json(s.models.at(0));
  out.emit("constant.csv", [&](const fs::path& p) { write_table(p, {"case", "rho", "lhs", "t_bound", "C"}, rows); });
}

// ---------------------------------------------------------------------------
// Criterion 7

void run_transport(const Scenario& s, const RunOptions& opts, Report& rep, ArtifactWriter& out) {
  const std::size_t n = grid_size(s, opts);
  const ShiftTransform tr(flat_graph(0.5), 0.5, 0.1, 0.3);
  std::mt19937_64 rng(scenario_seed(s, opts));
  double worst = 0.0, slack_n = 0.0, slack_2n = 0.0;
  std::vector<Row> rows;
  for (int k = 0; k < 20; ++k) {
    const FunctionalImage u = random_smooth_image(rng);
    const TransportCheck a = transport_check(rasterise(u, n), tr);
    const TransportCheck b = transport_check(rasterise(u, 2 * n), tr);
    worst = std::max(worst, a.ratio());
    slack_n = std::max(slack_n, std::max(0.0, a.ratio() - 1.0));
    slack_2n = std::max(slack_2n, std::max(0.0, b.ratio() - 1.0));
    rows.push_back({static_cast<double>(k), a.integral, a.bound, a.ratio(), b.integral, b.bound, b.ratio()});
  }
  rep.at_most("max_integral_over_bound", worst, 1.05);
  rep.check("slack_at_n", slack_n, NAN, NAN);
  rep.at_most("slack_at_2n_minus_slack_at_n", slack_2n - slack_n, 0.0);
  rep.environment["images"] = 20;
  out.emit("transport.csv", [&](const fs::path& p) {
    write_table(p, {"image", "integral_n", "bound_n", "ratio_n", "integral_2n", "bound_2n", "ratio_2n"}, rows);
  });
}

// ---------------------------------------------------------------------------
// Criterion 8

void run_wedge(const Scenario& s, const RunOptions& opts, Report& rep, ArtifactWriter& out) {
  const std::size_t n = grid_size(s, opts);
  std::vector<Row> rows;
  struct W {
    std::string name;
    ShiftTransform tr;
  };
  const std::vector<W> cases{{"flat", ShiftTransform(flat_graph(0.5), 0.5, 0.1, 0.25)},
                             {"circle", ShiftTransform(circle_arc_graph({0.5, 0.3}, 0.3, 0.2), 0.52, 0.05, 0.3)}};
  for (const auto& c : cases) {
    const WedgeArea w = wedge_area(c.tr, n);
    const double expected = std::abs(c.tr.magnitude()) * c.tr.radius() * c.tr.radius();
    rep.at_most(c.name + ".analytic_relative_error", rel_diff(w.analytic, expected), 1e-12);
    rep.at_most(c.name + ".raster_relative_error", rel_diff(w.pixel_count, expected), 0.02);
    rows.push_back({c.tr.magnitude(), c.tr.radius(), expected, w.analytic, w.pixel_count});
  }
  out.emit("wedge.csv", [&](const fs::path& p) { write_table(p, {"rho", "r", "expected", "analytic", "raster"}, rows); });
}

// ---------------------------------------------------------------------------
// Criterion 9

// Share of the data jump edges across which u still differs by more than the
// detection threshold, comparing plain one-sided window means. The flatness
// gate of detect_jumps is left out here because isotropic TV blurs staircase
// edges of the discretised data by a cell even when the jump survives.
double visible_jump_fraction(const GridImage& u, const JumpSet& jf, const JumpDetection& det) {
  if (jf.empty()) return 0.0;
  const std::size_t w = det.window;
  std::size_t kept = 0;
  for (const JumpSample& s : jf.samples) {
    double lo = 0.0, hi = 0.0;
    std::size_t nl = 0, nu = 0;
    for (std::size_t k = 0; k < w; ++k) {
      if (s.vertical_edge) {
        if (s.col >= k) lo += u(s.row, s.col - k), ++nl;
        if (s.col + 1 + k < u.width()) hi += u(s.row, s.col + 1 + k), ++nu;
      } else {
        if (s.row >= k) lo += u(s.row - k, s.col), ++nl;
        if (s.row + 1 + k < u.height()) hi += u(s.row + 1 + k, s.col), ++nu;
      }
    }
    if (std::abs(hi / nu - lo / nl) > det.threshold) ++kept;
  }
  return static_cast<double>(kept) / static_cast<double>(jf.size());
}

void run_containment(const Scenario& s, const RunOptions& opts, Report& rep, ArtifactWriter& out) {
  const std::size_t n = grid_size(s, opts);
  const ModelSpec& model = s.models.at(0);
  rep.environment["model"] = model_json(model);
  SolverConfig cfg;
  cfg.tolerance = 1e-5;
  cfg.max_iterations = 2000;
  rep.environment["solver"] = {{"tolerance", cfg.tolerance}, {"max_iterations", cfg.max_iterations}};
  for (PhantomKind kind : {PhantomKind::Square, PhantomKind::Disk, PhantomKind::Checkerboard}) {
    PhantomSpec ph;
    ph.kind = kind;
    ph.size = n;
    const std::string name = to_string(kind);
    rep.measure(name + ".containment_excess", NAN, 0.02, [&] {
      const GridImage f = generate_phantom(ph);
      const SolveResult r = solve_denoise(f, model.fidelity, model.regulariser, cfg);
      JumpDetection det;
      det.threshold = default_jump_threshold(f);
      const JumpSet ju = detect_jumps(r.solution, det), jf = detect_jumps(f, det);
      rep.check(name + ".jump_samples", static_cast<double>(ju.size()), 1.0, NAN);
      rep.at_least(name + ".visible_jumps", visible_jump_fraction(r.solution, jf, det), 0.5);
      rep.environment["iterations"][name] = r.iterations;
      rep.environment["residual"][name] = r.residual;
      out.emit(name + "_u.pgm", [&](const fs::path& p) { io::write_pgm(p, r.solution); });
      if (out.plots()) out.emit(name + "_panel.png", [&](const fs::path& p) { plot::solve_panel(p, f, r.solution); });
      return containment_excess(ju, jf, 1.0);
    });
  }
}

void run_constant(const Scenario& s, const RunOptions& opts, Report& rep, ArtifactWriter& out) {
  const std::size_t n = grid_size(s, opts);
  const GridImage f(n, n, 1.0 / static_cast<double>(n), 0.5);
  const ModelSpec& model = s.models.at(0);
  const SolveResult r = solve_denoise(f, model.fidelity, model.regulariser);
  double diff = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) diff = std::max(diff, std::abs(r.solution[k] - f[k]));
  const JumpSet ju = detect_jumps(r.solution), jf = detect_jumps(f);
  rep.at_most("total_variation", total_variation(f), 0.0);
  rep.at_most("max_change", diff, 0.0);
  rep.at_most("jumps_u", static_cast<double>(ju.size()), 0.0);
  rep.at_most("containment_excess", containment_excess(ju, jf), 0.0);
  out.emit("u.pgm", [&](const fs::path& p) { io::write_pgm(p, r.solution); });
}

// ---------------------------------------------------------------------------
// Criterion 10

void run_corners(const Scenario& s, const RunOptions& opts, Report& rep, ArtifactWriter& out) {
  const std::size_t n = grid_size(s, opts);
  PhantomSpec ph = *s.phantom;
  ph.size = n;
  const GridImage f = generate_phantom(ph);
  const double lo = ph.centre.x() - 0.5 * ph.side, hi = ph.centre.x() + 0.5 * ph.side;
  SolverConfig cfg;
  cfg.tolerance = 1e-6;
  cfg.max_iterations = 3000;
  std::vector<Row> rows;
  for (const ModelSpec& model : s.models) {
    const double alpha = model.regulariser.alpha;
    char label[32];
    std::snprintf(label, sizeof label, "alpha_%g", alpha);
    const SolveResult r = solve_denoise(f, model.fidelity, model.regulariser, cfg);
    rep.environment["iterations"][label] = r.iterations;
    double worst = 0.0;
    const std::pair<Vec2, Vec2> corners[] = {
        {{lo, lo}, {1, 1}}, {{hi, lo}, {-1, 1}}, {{hi, hi}, {-1, -1}}, {{lo, hi}, {1, -1}}};
    for (const auto& [c, in] : corners) {
      const CornerFit fit = corner_radius(r.solution, 0.5, c, in, 4.0 * alpha);
      worst = std::max(worst, rel_diff(fit.radius, alpha));
      rows.push_back({alpha, c.x(), c.y(), fit.radius, fit.free_circle.radius, static_cast<double>(fit.points)});
    }
    rep.at_most(std::string(label) + ".corner_radius_relative_error", worst, 0.15);

    // per-point curvature along the middle third of every edge
    const CurvatureReport curv = level_line_curvature(r.solution, 0.5);
    const double a = lo + ph.side / 3.0, b = hi - ph.side / 3.0, band = 0.05;
    double kmax = 0.0;
    for (std::size_t k = 0; k < curv.points.size(); ++k) {
      const Vec2& p = curv.points[k];
      const bool on_h = p.x() > a && p.x() < b && (std::abs(p.y() - lo) < band || std::abs(p.y() - hi) < band);
      const bool on_v = p.y() > a && p.y() < b && (std::abs(p.x() - lo) < band || std::abs(p.x() - hi) < band);
      if (on_h || on_v) kmax = std::max(kmax, curv.curvature[k]);
    }
    rep.at_most(std::string(label) + ".edge_curvature_times_alpha", kmax * alpha, 0.1);
    out.emit(std::string(label) + "_u.pgm", [&](const fs::path& p) { io::write_pgm(p, r.solution); });
    if (out.plots())
      out.emit(std::string(label) + "_contour.png", [&](const fs::path& p) {
        plot::contour_overlay(p, r.solution, extract_contours(r.solution, 0.5), "L1-TV " + std::string(label));
      });
  }
  rep.environment["stencil"] = "symmetric";
  out.emit("corners.csv", [&](const fs::path& p) {
    write_table(p, {"alpha", "corner_x", "corner_y", "radius", "free_radius", "points"}, rows);
  });
}

// ---------------------------------------------------------------------------
// Criterion 11

void run_mean_curvature(const Scenario&, const RunOptions&, Report& rep, ArtifactWriter& out) {
  std::vector<Row> rows;
  std::vector<plot::Series> series;
  for (double radius : {0.3, 0.5}) {
    auto error_at = [&](double dx) {
      const auto m = static_cast<std::size_t>(std::llround(radius / dx));
      std::vector<double> f(m + 1);
      for (std::size_t k = 0; k <= m; ++k) {
        const double v = -0.5 * radius + static_cast<double>(k) * dx;
        f[k] = std::sqrt(radius * radius - v * v);
      }
      double err = 0.0;
      for (double kappa : mean_curvature_of_graph(f, dx)) err = std::max(err, std::abs(kappa * radius - 1.0));
      return err;
    };
    char label[32];
    std::snprintf(label, sizeof label, "R_%g", radius);
    plot::Series ser{label, {}, {}};
    for (double dx : {4e-3, 2e-3, 1e-3, 5e-4}) {
      const double e = error_at(dx);
      rows.push_back({radius, dx, e});
      ser.x.push_back(dx), ser.y.push_back(e);
    }
    const double e1 = error_at(1e-3), e2 = error_at(5e-4);
    rep.at_most(std::string(label) + ".relative_error", e1, 0.01);
    rep.check(std::string(label) + ".halving_factor", e1 / e2, 3.0, 5.0);
    series.push_back(std::move(ser));
  }
  out.emit("convergence.csv", [&](const fs::path& p) { write_table(p, {"R", "spacing", "max_rel_error"}, rows); });
  if (out.plots()) out.emit("convergence.png", [&](const fs::path& p) { plot::loglog_plot(p, series, "CURVATURE ERROR VS SPACING"); });
}

// ---------------------------------------------------------------------------
// Criterion 12

void run_r_curvature(const Scenario& s, const RunOptions&, Report& rep, ArtifactWriter& out) {
  const RegulariserSpec& reg = s.models.at(0).regulariser;
  const double r = 0.02, rho = 1e-3, lambda = 1.0;
  const Vec2 centre(0.5, 0.4);
  std::vector<Row> rows;
  for (double radius : {0.2, 0.3}) {
    const FunctionalImage u = disk_jump_image(centre, radius, lambda, 0.0, 0.1);
    const LipschitzGraph g = circle_arc_graph(centre, radius, 0.1);
    const RCurvature est = r_curvature_estimate(u, g, centre.x(), standard_bump_profile(), r, rho, reg);
    const double expected = reg.singular_weight() * lambda / radius;
    char label[32];
    std::snprintf(label, sizeof label, "R_%g", radius);
    rep.at_most(std::string(label) + ".relative_error", rel_diff(est.estimate, expected), 0.10);
    rows.push_back({radius, est.estimate, expected, est.forward, est.backward, r, rho});
  }
  const LipschitzGraph flat = flat_graph(0.5);
  const RCurvature est = r_curvature_estimate(graph_jump_image(flat, lambda, 0.0), flat, 0.5, standard_bump_profile(), r, rho, reg);
  rep.at_most("flat.abs_estimate", std::abs(est.estimate), 1e-2);
  rows.push_back({INFINITY, est.estimate, 0.0, est.forward, est.backward, r, rho});
  rep.environment["r"] = r;
  rep.environment["rho"] = rho;
  rep.environment["model"] = model_json(s.models.at(0));
  out.emit("rcurv.csv", [&](const fs::path& p) {
    write_table(p, {"R", "estimate", "expected", "forward", "backward", "r", "rho"}, rows);
  });
}

// ---------------------------------------------------------------------------
// Criterion 13

void run_oracle(const Scenario& s, const RunOptions& opts, Report& rep, ArtifactWriter& out) {
  std::vector<Row> rows;
  double worst_gap = 0.0, worst_max_principle = -INFINITY;
  std::size_t unconverged = 0;
  std::uint64_t seed = scenario_seed(s, opts);
  for (std::size_t n : {8u, 16u}) {
    for (std::size_t m = 0; m < s.models.size(); ++m) {
      const ModelSpec& model = s.models[m];
      GridImage f(n, n, 1.0 / static_cast<double>(n));
      std::mt19937_64 rng(seed++);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (std::size_t k = 0; k < f.size(); ++k) f[k] = unit(rng);
      const SolveResult o = oracle_solve(f, model.fidelity, model.regulariser);
      const SolveResult r = solve_denoise(f, model.fidelity, model.regulariser);
      if (!o.converged) ++unconverged;
      const double gap = std::abs(r.objective - o.objective) / std::abs(o.objective);
      worst_gap = std::max(worst_gap, gap);
      double mp = 0.0;
      if (model.fidelity.p > 1.0) {
        const double range = f.max() - f.min();
        mp = std::max(f.min() - r.solution.min(), r.solution.max() - f.max()) / range;
        worst_max_principle = std::max(worst_max_principle, mp);
      }
      rows.push_back({static_cast<double>(n), static_cast<double>(m), model.fidelity.p, o.objective, r.objective, gap,
                      static_cast<double>(o.iterations), static_cast<double>(r.iterations), mp});
    }
  }
  rep.at_most("oracle_unconverged", static_cast<double>(unconverged), 0.0);
  rep.at_most("max_relative_objective_gap", worst_gap, 1e-6);
  rep.at_most("max_principle_violation_over_range", worst_max_principle, 1e-6);
  json models = json::array();
  for (const auto& m : s.models) models.push_back(model_json(m));
  rep.environment["models"] = models;
  out.emit("oracle.csv", [&](const fs::path& p) {
    write_table(p, {"n", "model", "p", "oracle_objective", "objective", "rel_gap", "oracle_iterations", "iterations", "max_principle"},
                rows);
  });
}

// ---------------------------------------------------------------------------
// Criterion 14

void run_coarea(const Scenario& s, const RunOptions& opts, Report& rep, ArtifactWriter& out) {
  const std::size_t n = grid_size(s, opts);
  PhantomSpec ph = *s.phantom;
  ph.size = n;
  const GridImage u = generate_phantom(ph);
  const NestedDecomposition d = nested_decomposition(ph);
  double sum = 0.0;
  for (std::size_t k = 0; k < d.sets.size(); ++k) sum += d.heights[k] * perimeter(d.sets[k], u.spacing());
  const double tv = total_variation(u);
  rep.at_most("squares.relative_difference", rel_diff(tv, sum), 1e-12);

  // nested disks with separated boundaries and unequal heights
  const double h = 1.0 / static_cast<double>(n);
  const double radii[] = {0.4, 0.3, 0.2, 0.1};
  const double heights[] = {0.5, 1.0, 2.0, 0.25};
  GridImage v(n, n, h, 0.0);
  double disk_sum = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    Mask m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if ((v.cell_centre(i, j) - Vec2(0.5, 0.5)).norm() < radii[k]) {
          m.set(i, j, true);
          v(i, j) += heights[k];
        }
    disk_sum += heights[k] * perimeter(m, h);
  }
  rep.at_most("disks.relative_difference", rel_diff(total_variation(v), disk_sum), 1e-12);
  rep.environment["tv_squares"] = tv;
  rep.environment["tv_disks"] = disk_sum;
  out.emit("nested.pgm", [&](const fs::path& p) { io::write_pgm(p, u); });
}

// ---------------------------------------------------------------------------

std::vector<Scenario> make_builtins() {
  std::vector<Scenario> out;
  auto add = [&](std::string name, int criterion, std::string description, std::size_t resolution, ScenarioRunner run,
                 std::vector<ModelSpec> models = {}, std::optional<PhantomSpec> phantom = std::nullopt) {
    Scenario s;
    s.name = std::move(name);
    s.criterion = criterion;
    s.description = std::move(description);
    s.resolution = resolution;
    s.seed = 1000 + static_cast<std::uint64_t>(out.size());
    s.models = std::move(models);
    s.phantom = std::move(phantom);
    s.run = std::move(run);
    out.push_back(std::move(s));
  };
  add("jacobian-identity", 1, "closed-form Jacobian determinant against central differences of the shift", 0, run_jacobian);
  add("pair-jacobian", 2, "J1 + J2 - 2 vanishes for the pair (rho, -rho)", 0, run_pair_jacobian);
  add("constant-scaling", 3, "log-log slopes of T for (rho, -rho) and (rho, identity); maximal displacement", 0, run_scaling);
  add("biestimate", 4, "sup |W1 w| + |W2 w| - 2 against 1/2 |W1^T W1 + W2^T W2 - 2I|", 0, run_biestim);
  add("double-lipschitz-tv", 5, "TV gap under paired shifts against alpha G |Du| and its quadratic decay", 0,
      run_double_lip, {{FidelitySpec::power(2.0), RegulariserSpec::tv(0.1)}});
  add("huber-membership", 6, "Huber co-coercivity with (1/eta, eta) and the empirical gap constant", 0, run_huber,
      {{FidelitySpec::power(2.0), RegulariserSpec::huber(0.1, 1.0)}});
  add("transport-estimate", 7, "sum |u o gamma - u| h^2 against M |Du| on random smooth images", 256, run_transport);
  add("wedge-area", 8, "rasterised wedge area against |rho| r^2", 512, run_wedge);
  add("jump-containment-rof", 9, "jump set of the ROF solution inside the jump set of the data", 256, run_containment,
      {{FidelitySpec::power(2.0), RegulariserSpec::tv(0.02)}});
  add("jump-containment-p15", 9, "jump set containment for the L^1.5 fidelity", 256, run_containment,
      {{FidelitySpec::power(1.5), RegulariserSpec::tv(0.02)}});
  add("jump-containment-huber", 9, "jump set containment for Huber-TV", 256, run_containment,
      {{FidelitySpec::power(2.0), RegulariserSpec::huber(0.02, 10.0)}});
  add("constant-image", 9, "constant data: nothing moves, no jumps", 64, run_constant,
      {{FidelitySpec::power(2.0), RegulariserSpec::tv(0.05)}});
  {
    PhantomSpec sq;
    sq.kind = PhantomKind::Square;
    sq.side = 0.6;
    std::vector<ModelSpec> models;
    for (double alpha : {0.02, 0.04}) {
      RegulariserSpec reg = RegulariserSpec::tv(alpha);
      reg.stencil = DiffStencil::Symmetric;
      models.push_back({FidelitySpec::power(1.0), reg});
    }
    add("corner-rounding", 10, "L1-TV rounds the corners of a square to radius alpha", 256, run_corners, models, sq);
  }
  add("mean-curvature", 11, "graph mean curvature of a circle and its second-order convergence", 0, run_mean_curvature);
  add("r-curvature", 12, "finite-difference R-curvature against alpha lambda / R", 0, run_r_curvature,
      {{FidelitySpec::power(1.0), RegulariserSpec::tv(0.1)}});
  {
    std::vector<ModelSpec> models;
    for (double p : {1.0, 1.5, 2.0}) {
      models.push_back({FidelitySpec::power(p, 0.5), RegulariserSpec::tv(0.05)});
      models.push_back({FidelitySpec::power(p, 0.5), RegulariserSpec::huber(0.05, 0.1)});
      models.push_back({FidelitySpec::power(p, 0.5), RegulariserSpec::huber(0.05, 10.0)});
    }
    add("solver-oracle", 13, "default solver against the small-step reference on random 8x8 and 16x16 data", 0,
        run_oracle, models);
  }
  {
    PhantomSpec nest;
    nest.kind = PhantomKind::Nested;
    nest.side = 0.8;
    nest.levels = 3;
    nest.gap = 0.1;
    add("coarea", 14, "TV of nested indicators equals the weighted sum of perimeters", 256, run_coarea, {}, nest);
  }
  for (const auto& s : out) s.validate();
  return out;
}

}  // namespace

const std::vector<Scenario>& builtin_scenarios() {
  static const std::vector<Scenario> list = make_builtins();
  return list;
}

const Scenario& find_scenario(const std::string& name) {
  for (const auto& s : builtin_scenarios())
    if (s.name == name) return s;
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

Report run_scenario(const Scenario& s, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  Report rep;
  rep.scenario = s.name;
  rep.criterion = s.criterion;
  rep.description = s.description;
  rep.environment["seed"] = scenario_seed(s, opts);
  if (const std::size_t n = grid_size(s, opts); n > 0) rep.environment["resolution"] = n;
  ArtifactWriter writer(opts, rep, s.name);
  try {
    s.validate();
    s.run(s, opts, rep, writer);
  } catch (const std::exception& e) {
    Metric& m = rep.check("pipeline", NAN, NAN, NAN);
    m.pass = false;
    m.error = e.what();
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::vector<Report> run_scenarios(const std::vector<const Scenario*>& list, const RunOptions& opts, std::size_t jobs) {
  std::vector<Report> out(list.size());
  if (jobs <= 1) {
    for (std::size_t k = 0; k < list.size(); ++k) out[k] = run_scenario(*list[k], opts);
    return out;
  }
  std::size_t next = 0;
  while (next < list.size()) {
    std::vector<std::future<Report>> batch;
    const std::size_t first = next;
    for (; next < list.size() && next - first < jobs; ++next)
      batch.push_back(std::async(std::launch::async, [&, k = next] { return run_scenario(*list[k], opts); }));
    for (std::size_t k = 0; k < batch.size(); ++k) out[first + k] = batch[k].get();
  }
  return out;
}

void append_jsonl(const fs::path& path, const std::vector<Report>& reports) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + path.string());
  for (const auto& r : reports) out << r.to_json().dump() << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::pair<int, bool>> criterion_summary(const std::vector<Report>& reports) {
  std::map<int, bool> acc;
  for (const auto& r : reports) {
    auto [it, inserted] = acc.emplace(r.criterion, r.passed());
    if (!inserted) it->second = it->second && r.passed();
  }
  return {acc.begin(), acc.end()};
}

}  // namespace tvjump
