// Command-line front end: single operations on files and the scenario suite.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "tvjump/experiments.hpp"
#include "tvjump/image_io.hpp"
#include "tvjump/jumps.hpp"
#include "tvjump/phantoms.hpp"
#include "tvjump/plot.hpp"
#include "tvjump/pushforward.hpp"
#include "tvjump/shift.hpp"
#include "tvjump/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tvjump;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::size_t resolution = 0;
  std::string out_dir;
  bool force = false;
  bool json = false;
};

struct ModelArgs {
  double p = 2.0;
  double weight = 1.0;
  std::string reg = "tv";
  double alpha = 0.05;
  double eta = 1.0;
  std::string stencil = "forward";

  ModelSpec build() const {
    ModelSpec m{FidelitySpec::power(p, weight), {}};
    if (reg == "tv") m.regulariser = RegulariserSpec::tv(alpha);
    else if (reg == "huber") m.regulariser = RegulariserSpec::huber(alpha, eta);
    else throw std::invalid_argument("--reg must be tv or huber");
    if (stencil == "symmetric") m.regulariser.stencil = DiffStencil::Symmetric;
    else if (stencil != "forward") throw std::invalid_argument("--stencil must be forward or symmetric");
    return m;
  }
};

void add_model_options(CLI::App* app, ModelArgs& m) {
  app->add_option("--p", m.p, "fidelity exponent")->check(CLI::Range(1.0, 1e6));
  app->add_option("--weight", m.weight, "fidelity weight")->check(CLI::PositiveNumber);
  app->add_option("--reg", m.reg, "regulariser: tv or huber")->check(CLI::IsMember({"tv", "huber"}));
  app->add_option("--alpha", m.alpha, "regularisation weight")->check(CLI::PositiveNumber);
  app->add_option("--eta", m.eta, "Huber parameter (quadratic below 1/eta)")->check(CLI::PositiveNumber);
  app->add_option("--stencil", m.stencil, "difference stencil: forward or symmetric")
      ->check(CLI::IsMember({"forward", "symmetric"}));
}

fs::path output_path(const Globals& g, const std::string& name) {
  if (name.empty()) return {};
  fs::path p(name);
  if (p.is_relative() && !g.out_dir.empty()) p = fs::path(g.out_dir) / p;
  if (fs::exists(p) && !g.force) throw std::runtime_error(p.string() + " exists; pass --force to overwrite");
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

void emit(const Globals& g, const json& j) {
  if (g.json) {
    std::cout << j.dump() << '\n';
    return;
  }
  for (const auto& [k, v] : j.items()) std::cout << k << ": " << v.dump() << '\n';
}

GridImage load_or_generate(const Globals& g, const std::string& input, const std::string& phantom) {
  if (!input.empty()) return io::read_image(input);
  return generate_phantom(phantom, g.resolution > 0 ? g.resolution : 256, g.seed);
}

LipschitzGraph make_graph(const std::string& kind) {
  if (kind == "flat") return flat_graph(0.5);
  if (kind == "circle") return circle_arc_graph({0.5, 0.3}, 0.3, 0.2);
  throw std::invalid_argument("--graph must be flat or circle");
}

double default_centre(const std::string& kind) { return kind == "flat" ? 0.5 : 0.52; }

FunctionalImage make_image(const std::string& kind) {
  if (kind == "smooth") return gaussian_image({0.52, 0.47}, 0.15);
  if (kind == "jump-flat") return graph_jump_image(flat_graph(0.5), 1.0, 0.0, gaussian_image({0.5, 0.5}, 0.2, 0.3));
  if (kind == "jump-circle") return disk_jump_image({0.5, 0.3}, 0.3, 1.0, 0.0, 0.2);
  throw std::invalid_argument("--image must be smooth, jump-flat or jump-circle");
}

json jump_json(const JumpSet& js) {
  json arr = json::array();
  for (const auto& s : js.samples)
    arr.push_back({{"x", s.location.x()}, {"y", s.location.y()}, {"nx", s.normal.x()}, {"ny", s.normal.y()},
                   {"upper", s.upper}, {"lower", s.lower}});
  return arr;
}

void print_report_line(const Report& r) {
  std::printf("%-24s criterion %2d  %s  (%.1f s)\n", r.scenario.c_str(), r.criterion, r.passed() ? "PASS" : "FAIL",
              r.seconds);
  for (const auto& m : r.metrics) {
    std::printf("    %-44s %-12.6g", m.name.c_str(), m.value);
    if (!std::isnan(m.lo)) std::printf(" >= %-10.4g", m.lo);
    if (!std::isnan(m.hi)) std::printf(" <= %-10.4g", m.hi);
    std::printf(" %s%s\n", m.pass ? "ok" : "FAIL", m.error.empty() ? "" : (" [" + m.error + "]").c_str());
  }
  for (const auto& e : r.errors) std::printf("    note: %s\n", e.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric denoising with TV-type regularisers and checks of the shift-transform calculus"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "seed for phantoms and sampled experiments");
  app.add_option("--resolution", g.resolution, "grid size N (cells per side)");
  app.add_option("--out-dir", g.out_dir, "directory for outputs and artifacts");
  app.add_flag("--force", g.force, "overwrite existing outputs");
  app.add_flag("--json", g.json, "machine-readable output on stdout");

  // solve
  auto* solve = app.add_subcommand("solve", "denoise an image");
  std::string solve_in, solve_phantom = "disk-noisy", solve_out = "u.pgm", solve_panel;
  ModelArgs solve_model;
  SolverConfig solve_cfg;
  solve->add_option("--input", solve_in, "input image (.pgm or .csv)");
  solve->add_option("--phantom", solve_phantom, "phantom used without --input");
  solve->add_option("--output", solve_out, "solution path (.pgm or .csv)");
  solve->add_option("--panel", solve_panel, "PNG with f, u and |u - f|");
  solve->add_option("--max-iter", solve_cfg.max_iterations, "iteration budget");
  solve->add_option("--tol", solve_cfg.tolerance, "relative gap target");
  add_model_options(solve, solve_model);

  // constants
  auto* constants = app.add_subcommand("constants", "comparison constants of a shift pair");
  std::string c_graph = "flat", c_pair = "antipodal";
  double c_rho = 0.1, c_radius = 0.1;
  std::size_t c_density = 64;
  constants->add_option("--graph", c_graph, "flat or circle");
  constants->add_option("--rho", c_rho, "shift magnitude");
  constants->add_option("--radius", c_radius, "bump radius r");
  constants->add_option("--pair", c_pair, "antipodal (rho, -rho) or identity (rho, id)")
      ->check(CLI::IsMember({"antipodal", "identity"}));
  constants->add_option("--density", c_density, "samples per axis");

  // doublelip
  auto* dlip = app.add_subcommand("doublelip", "two-sided regulariser gap under a shift pair");
  std::string d_image = "smooth";
  double d_rho = 0.01, d_radius = 0.05;
  ModelArgs d_model;
  d_model.alpha = 0.1;
  dlip->add_option("--image", d_image, "smooth, jump-flat or jump-circle");
  dlip->add_option("--rho", d_rho, "shift magnitude");
  dlip->add_option("--radius", d_radius, "bump radius r");
  add_model_options(dlip, d_model);

  // transport
  auto* transport = app.add_subcommand("transport", "transport integral against M |Du|");
  std::string t_in, t_phantom = "smooth-bump";
  double t_rho = 0.3, t_radius = 0.1;
  transport->add_option("--input", t_in, "input image");
  transport->add_option("--phantom", t_phantom, "phantom used without --input");
  transport->add_option("--rho", t_rho, "shift magnitude");
  transport->add_option("--radius", t_radius, "bump radius r");

  // wedge
  auto* wedge = app.add_subcommand("wedge", "area swept by a shift");
  std::string w_graph = "flat";
  double w_rho = 0.25, w_radius = 0.1;
  wedge->add_option("--graph", w_graph, "flat or circle");
  wedge->add_option("--rho", w_rho, "shift magnitude");
  wedge->add_option("--radius", w_radius, "bump radius r");

  // jumps
  auto* jumps = app.add_subcommand("jumps", "detect jumps and measure containment");
  std::string j_sol, j_data, j_out;
  JumpDetection j_params;
  double j_theta = 0.0, j_dilate = 1.0;
  jumps->add_option("--solution", j_sol, "solution image")->required();
  jumps->add_option("--data", j_data, "data image")->required();
  jumps->add_option("--theta", j_theta, "threshold as a fraction of the data range, used for both images (0: 0.25)");
  jumps->add_option("--window", j_params.window, "one-sided window in cells");
  jumps->add_option("--dilate", j_dilate, "dilation of J_f in cells");
  jumps->add_option("--out", j_out, "JSON file with both jump sets");

  // curvature
  auto* curvature = app.add_subcommand("curvature", "level-line curvature by local circle fits");
  std::string k_in, k_out;
  double k_level = 0.5;
  std::size_t k_window = 7;
  curvature->add_option("--input", k_in, "image")->required();
  curvature->add_option("--level", k_level, "level value");
  curvature->add_option("--window", k_window, "half window in contour points");
  curvature->add_option("--out", k_out, "CSV with x, y, curvature, residual");

  // rcurv
  auto* rcurv = app.add_subcommand("rcurv", "pointwise R-curvature of a disk interface");
  double r_R = 0.2, r_r = 0.02, r_rho = 1e-3, r_lambda = 1.0;
  ModelArgs r_model;
  r_model.alpha = 0.1;
  rcurv->add_option("--R", r_R, "disk radius");
  rcurv->add_option("--r", r_r, "bump radius");
  rcurv->add_option("--rho", r_rho, "shift magnitude");
  rcurv->add_option("--lambda", r_lambda, "jump height");
  add_model_options(rcurv, r_model);

  // suite
  auto* suite = app.add_subcommand("suite", "run the built-in acceptance scenarios");
  std::vector<std::string> only;
  std::size_t jobs = 1;
  bool list = false, no_plots = false;
  suite->add_option("--only", only, "scenario names");
  suite->add_option("--jobs", jobs, "parallel scenarios")->check(CLI::PositiveNumber);
  suite->add_flag("--list", list, "list scenarios and exit");
  suite->add_flag("--no-plots", no_plots, "skip PNG output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      const GridImage f = load_or_generate(g, solve_in, solve_phantom);
      const ModelSpec m = solve_model.build();
      const SolveResult r = solve_denoise(f, m.fidelity, m.regulariser, solve_cfg);
      const fs::path out = output_path(g, solve_out);
      io::write_image(out, r.solution);
      if (!solve_panel.empty()) plot::solve_panel(output_path(g, solve_panel), f, r.solution);
      emit(g, {{"output", out.string()}, {"iterations", r.iterations}, {"converged", r.converged},
               {"residual", r.residual}, {"objective", r.objective}, {"model", to_json(m.fidelity, m.regulariser)}});
    } else if (constants->parsed()) {
      const ShiftTransform t1(make_graph(c_graph), default_centre(c_graph), c_radius, c_rho);
      const ShiftTransform t2 = c_pair == "antipodal" ? t1.with_magnitude(-c_rho) : t1.with_magnitude(0.0);
      const ComparisonConstants k = comparison_constants(t1, t2, c_density);
      emit(g, {{"G", k.g}, {"G_upper", k.g_upper}, {"J", k.j}, {"D1", k.d1}, {"D2", k.d2}, {"T", k.total()},
               {"samples", k.samples}, {"max_displacement", max_displacement(t1)}});
    } else if (dlip->parsed()) {
      const std::string graph = d_image == "jump-circle" ? "circle" : "flat";
      const ShiftTransform t(make_graph(graph), default_centre(graph), d_radius, d_rho);
      const ModelSpec m = d_model.build();
      const DoubleLipGap d = double_lip_gap(make_image(d_image), t, t.with_magnitude(-d_rho), m.regulariser);
      emit(g, {{"lhs", d.lhs}, {"lhs_smooth", d.lhs_smooth}, {"lhs_singular", d.lhs_singular}, {"variation", d.variation},
               {"G", d.constants.g}, {"T", d.constants.total()}, {"g_bound", d.g_bound}, {"t_bound", d.t_bound},
               {"g_ratio", d.g_ratio}, {"t_ratio", d.t_ratio}, {"richardson_delta", d.richardson_delta},
               {"violation", d.violation}});
    } else if (transport->parsed()) {
      const GridImage u = load_or_generate(g, t_in, t_phantom);
      const ShiftTransform t(flat_graph(0.5), 0.5, t_radius, t_rho);
      const TransportCheck c = transport_check(u, t);
      emit(g, {{"integral", c.integral}, {"bound", c.bound}, {"ratio", c.ratio()}});
    } else if (wedge->parsed()) {
      const ShiftTransform t(make_graph(w_graph), default_centre(w_graph), w_radius, w_rho);
      const WedgeArea w = wedge_area(t, g.resolution > 0 ? g.resolution : 512);
      emit(g, {{"analytic", w.analytic}, {"raster", w.pixel_count}, {"rho_r2", std::abs(w_rho) * w_radius * w_radius}});
    } else if (jumps->parsed()) {
      const GridImage u = io::read_image(j_sol), f = io::read_image(j_data);
      JumpDetection params = j_params;
      params.threshold = (j_theta > 0.0 ? j_theta : 0.25) * (f.max() - f.min());
      const JumpSet ju = detect_jumps(u, params), jf = detect_jumps(f, params);
      const double excess = containment_excess(ju, jf, j_dilate);
      if (!j_out.empty()) {
        std::ofstream out(output_path(g, j_out));
        out << json{{"solution", jump_json(ju)}, {"data", jump_json(jf)}, {"containment_excess", excess}}.dump(1) << '\n';
      }
      emit(g, {{"jumps_u", ju.size()}, {"jumps_f", jf.size()}, {"containment_excess", excess}});
    } else if (curvature->parsed()) {
      const GridImage u = io::read_image(k_in);
      const CurvatureReport rep = level_line_curvature(u, k_level, k_window);
      if (!k_out.empty()) {
        std::ofstream out(output_path(g, k_out));
        out << "x,y,curvature,residual\n";
        char buf[128];
        for (std::size_t k = 0; k < rep.points.size(); ++k) {
          std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", rep.points[k].x(), rep.points[k].y(),
                        rep.curvature[k], rep.residuals[k]);
          out << buf;
        }
      }
      emit(g, {{"points", rep.points.size()}, {"fitted_radius", rep.fitted_radius},
               {"fitted_centre", {rep.fitted_centre.x(), rep.fitted_centre.y()}}, {"fit_residual", rep.fit_residual}});
    } else if (rcurv->parsed()) {
      const Vec2 centre(0.5, 0.4);
      const ModelSpec m = r_model.build();
      const FunctionalImage u = disk_jump_image(centre, r_R, r_lambda, 0.0, 0.1);
      const RCurvature est = r_curvature_estimate(u, circle_arc_graph(centre, r_R, 0.1), centre.x(),
                                                  standard_bump_profile(), r_r, r_rho, m.regulariser);
      emit(g, {{"estimate", est.estimate}, {"forward", est.forward}, {"backward", est.backward},
               {"expected", m.regulariser.singular_weight() * r_lambda / r_R}, {"r", r_r}, {"rho", r_rho}});
    } else if (suite->parsed()) {
      if (list) {
        for (const auto& s : builtin_scenarios())
          std::printf("%-24s criterion %2d  %s\n", s.name.c_str(), s.criterion, s.description.c_str());
        return 0;
      }
      std::vector<const Scenario*> chosen;
      if (only.empty())
        for (const auto& s : builtin_scenarios()) chosen.push_back(&s);
      else
        for (const auto& n : only) chosen.push_back(&find_scenario(n));
      RunOptions opts;
      opts.out_dir = g.out_dir;
      opts.force = g.force;
      opts.seed = g.seed;
      opts.resolution = g.resolution;
      opts.plots = !no_plots;
      const auto reports = run_scenarios(chosen, opts, jobs);
      if (!g.out_dir.empty()) append_jsonl(fs::path(g.out_dir) / "reports.jsonl", reports);
      bool ok = true;
      for (const auto& r : reports) {
        ok = ok && r.passed();
        if (g.json) std::cout << r.to_json().dump() << '\n';
        else print_report_line(r);
      }
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
