// Runs every built-in scenario and prints one line per acceptance criterion.
#include <chrono>
#include <cstdio>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "tvjump/experiments.hpp"

using namespace tvjump;

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  RunOptions opts;
  std::string out_dir;
  bool verbose = false;
  app.add_option("--out-dir", out_dir, "write scenario artifacts here");
  app.add_flag("--verbose", verbose, "print every metric");
  CLI11_PARSE(app, argc, argv);
  opts.out_dir = out_dir;
  opts.force = true;

  std::vector<const Scenario*> list;
  for (const Scenario& s : builtin_scenarios()) list.push_back(&s);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Report> reports = run_scenarios(list, opts, 1);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::map<int, std::vector<const Report*>> by_criterion;
  for (const Report& r : reports) by_criterion[r.criterion].push_back(&r);

  bool all = true;
  for (const auto& [criterion, ok] : criterion_summary(reports)) {
    std::string names;
    double seconds = 0.0;
    for (const Report* r : by_criterion[criterion]) {
      names += (names.empty() ? "" : ",") + r->scenario;
      seconds += r->seconds;
    }
    std::printf("criterion %2d: %s  [%s, %.1f s]\n", criterion, ok ? "PASS" : "FAIL", names.c_str(), seconds);
    for (const Report* r : by_criterion[criterion])
      for (const Metric& m : r->metrics)
        if (verbose || !m.pass)
          std::printf("    %-28s %-36s %.6g%s%s\n", r->scenario.c_str(), m.name.c_str(), m.value,
                      m.pass ? "" : "  FAIL", m.error.empty() ? "" : ("  " + m.error).c_str());
    all = all && ok;
  }
  std::printf("total %.1f s\n", total);
  return all && by_criterion.size() == 14 ? 0 : 1;
}
