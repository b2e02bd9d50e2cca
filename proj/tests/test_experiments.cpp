#include <doctest.h>

#include <filesystem>
#include <set>
#include <fstream>

#include "tvjump/experiments.hpp"

using namespace tvjump;
namespace fs = std::filesystem;

TEST_CASE("built-in scenarios cover every criterion") {
  std::set<int> seen;
  for (const Scenario& s : builtin_scenarios()) {
    CHECK_NOTHROW(s.validate());
    seen.insert(s.criterion);
  }
  CHECK(seen.size() == 14);
  CHECK(find_scenario("jump-containment-rof").criterion == 9);
  CHECK_THROWS(find_scenario("no-such-scenario"));
}

TEST_CASE("constant image scenario passes with zero metrics") {
  const Report r = run_scenario(find_scenario("constant-image"));
  CHECK(r.passed());
  REQUIRE_FALSE(r.metrics.empty());
  for (const Metric& m : r.metrics) CHECK(m.value == 0.0);
}

TEST_CASE("reports replay byte for byte") {
  RunOptions opts;
  opts.seed = 3;
  const Scenario& s = find_scenario("jacobian-identity");
  const std::string a = run_scenario(s, opts).to_json().dump();
  const std::string b = run_scenario(s, opts).to_json().dump();
  CHECK(a == b);
  const auto both = run_scenarios({&s, &find_scenario("wedge-area")}, opts, 2);
  REQUIRE(both.size() == 2);
  CHECK(both[0].to_json().dump() == a);
  CHECK(both[1].scenario == "wedge-area");
}

TEST_CASE("metric failures are recorded, not thrown") {
  Report r;
  r.measure("boom", NAN, 1.0, []() -> double { throw std::runtime_error("broken"); });
  r.at_most("fine", 0.5, 1.0);
  REQUIRE(r.metrics.size() == 2);
  CHECK_FALSE(r.metrics[0].pass);
  CHECK(r.metrics[0].error == "broken");
  CHECK(r.metrics[1].pass);
  CHECK_FALSE(r.passed());
  r.metrics.erase(r.metrics.begin());
  CHECK(r.passed());
  r.at_least("nan", NAN, 0.0);
  CHECK_FALSE(r.passed());
}

TEST_CASE("artifacts are not overwritten without force") {
  const fs::path dir = fs::temp_directory_path() / "tvjump_unit_artifacts";
  fs::remove_all(dir);
  RunOptions opts;
  opts.out_dir = dir;
  Report rep;
  ArtifactWriter w(opts, rep, "demo");
  auto write = [](const std::string& text) {
    return [text](const fs::path& p) { std::ofstream(p) << text; };
  };
  w.emit("a.txt", write("first"));
  w.emit("a.txt", write("second"));
  CHECK(rep.errors.size() == 1);
  std::ifstream in(dir / "demo_a.txt");
  std::string got;
  in >> got;
  CHECK(got == "first");

  opts.force = true;
  Report forced;
  ArtifactWriter fw(opts, forced, "demo");
  fw.emit("a.txt", write("third"));
  CHECK(forced.errors.empty());
  std::ifstream again(dir / "demo_a.txt");
  again >> got;
  CHECK(got == "third");
}

TEST_CASE("criterion summary requires every scenario of a criterion") {
  Report a, b, c;
  a.criterion = 9;
  a.at_most("x", 0.0, 1.0);
  b.criterion = 9;
  b.at_most("x", 2.0, 1.0);
  c.criterion = 10;
  c.at_most("x", 0.0, 1.0);
  const auto sum = criterion_summary({a, b, c});
  REQUIRE(sum.size() == 2);
  CHECK(sum[0] == std::pair<int, bool>{9, false});
  CHECK(sum[1] == std::pair<int, bool>{10, true});
}
