#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvjump/energies.hpp"
#include "tvjump/phantoms.hpp"

namespace tvjump {

/// One measured quantity with its acceptance band. A bound that is NaN is
/// absent. A metric whose computation threw carries the message in `error`
/// and fails.
struct Metric {
  std::string name;
  double value = 0.0;
  double lo = NAN;
  double hi = NAN;
  bool pass = false;
  std::string error;
};

struct Report {
  std::string scenario;
  int criterion = 0;
  std::string description;
  std::vector<Metric> metrics;
  nlohmann::json environment = nlohmann::json::object();
  std::vector<std::string> artifacts;
  std::vector<std::string> errors;  ///< I/O problems; they do not fail the report
  double seconds = 0.0;             ///< wall time, kept out of the JSON

  bool passed() const;
  /// Deterministic serialisation (no timings).
  nlohmann::json to_json() const;

  /// Records value against [lo, hi] (either may be NaN).
  Metric& check(const std::string& name, double value, double lo, double hi);
  Metric& at_most(const std::string& name, double value, double hi) { return check(name, value, NAN, hi); }
  Metric& at_least(const std::string& name, double value, double lo) { return check(name, value, lo, NAN); }
  /// Runs `compute`; a thrown exception becomes a failed metric with the message.
  void measure(const std::string& name, double lo, double hi, const std::function<double()>& compute);
};

struct RunOptions {
  /// Where CSV/PNG/PGM artifacts go; empty disables artifacts.
  std::filesystem::path out_dir;
  bool force = false;
  bool plots = true;
  std::uint64_t seed = 0;
  /// Overrides the scenario grid size when nonzero (scenarios with a fixed
  /// resolution in their criterion ignore it).
  std::size_t resolution = 0;
};

struct ModelSpec {
  FidelitySpec fidelity;
  RegulariserSpec regulariser;
};

struct Scenario;

/// Artifact sink for one scenario run: refuses to replace existing files
/// unless forced, and logs what was written into the report.
class ArtifactWriter {
public:
  ArtifactWriter(const RunOptions& opts, Report& report, std::string prefix);

  bool enabled() const { return !opts_.out_dir.empty(); }
  bool plots() const { return enabled() && opts_.plots; }
  /// Runs `write` on the target path when allowed; failures go to report.errors.
  void emit(const std::string& name, const std::function<void(const std::filesystem::path&)>& write);

private:
  const RunOptions& opts_;
  Report& report_;
  std::string prefix_;
};

using ScenarioRunner = std::function<void(const Scenario&, const RunOptions&, Report&, ArtifactWriter&)>;

struct Scenario {
  std::string name;
  int criterion = 0;
  std::string description;
  std::size_t resolution = 0;  ///< 0 when the scenario has no grid
  std::uint64_t seed = 0;
  std::optional<PhantomSpec> phantom;
  std::vector<ModelSpec> models;
  ScenarioRunner run;

  void validate() const;
};

/// Built-in scenarios in criterion order.
const std::vector<Scenario>& builtin_scenarios();
const Scenario& find_scenario(const std::string& name);

/// Runs one scenario. Never throws for metric failures; they are recorded.
Report run_scenario(const Scenario& s, const RunOptions& opts = {});

/// Runs scenarios with up to `jobs` worker threads; reports keep the input order.
std::vector<Report> run_scenarios(const std::vector<const Scenario*>& list, const RunOptions& opts,
                                  std::size_t jobs = 1);

/// Appends one JSON object per line.
void append_jsonl(const std::filesystem::path& path, const std::vector<Report>& reports);

/// Criterion number -> pass, over the given reports (a criterion passes when
/// all its scenarios do).
std::vector<std::pair<int, bool>> criterion_summary(const std::vector<Report>& reports);

}  // namespace tvjump
