#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

int call(std::vector<std::string> args) {
  args.insert(args.begin(), "formation");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return formation::cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("formation_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Example 1 shortened to keep the test quick.
fs::path short_example(const fs::path& dir, double t_end) {
  nlohmann::json doc = nlohmann::json::parse(slurp(oracle::scenario_path("example1.json")));
  doc["t_end"] = t_end;
  const fs::path p = dir / "short.json";
  std::ofstream(p) << doc.dump(2);
  return p;
}

}  // namespace

TEST_CASE("run writes the log files") {
  const fs::path dir = scratch("run");
  const fs::path scenario = short_example(dir, 1.0);
  REQUIRE(call({"run", scenario.string(), "--out", (dir / "a").string()}) == 0);
  for (const char* f : {"trajectory.csv", "lyapunov.csv", "events.jsonl", "summary.json"}) {
    CHECK(fs::exists(dir / "a" / f));
  }
  const std::string csv = slurp(dir / "a" / "trajectory.csv");
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header.rfind("t,p1_x,p1_y,v1_x,v1_y,e11_x,e11_y,e21_x,e21_y,p2_x", 0) == 0);
  CHECK(header.size() > 2);
  CHECK(header.substr(header.size() - 2) == ",V");
  std::istringstream events(slurp(dir / "a" / "events.jsonl"));
  std::string line;
  int count = 0;
  while (std::getline(events, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"t", "alpha", "beta", "e_cur", "e_new", "accepted", "reason"}) CHECK(j.contains(key));
    ++count;
  }
  CHECK(count == 20);
}

TEST_CASE("identical runs give identical files") {
  const fs::path dir = scratch("determinism");
  const fs::path scenario = short_example(dir, 1.0);
  REQUIRE(call({"run", scenario.string(), "--out", (dir / "a").string()}) == 0);
  REQUIRE(call({"run", scenario.string(), "--out", (dir / "b").string()}) == 0);
  for (const char* f : {"trajectory.csv", "lyapunov.csv", "events.jsonl", "summary.json"}) {
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  }
}

TEST_CASE("output directory from the environment") {
  const fs::path dir = scratch("env");
  const fs::path scenario = short_example(dir, 0.2);
  ::setenv("FORMATION_OUT_DIR", (dir / "from_env").string().c_str(), 1);
  const int rc = call({"run", scenario.string()});
  ::unsetenv("FORMATION_OUT_DIR");
  REQUIRE(rc == 0);
  CHECK(fs::exists(dir / "from_env" / "lyapunov.csv"));
  // an explicit flag wins
  ::setenv("FORMATION_OUT_DIR", (dir / "ignored").string().c_str(), 1);
  CHECK(call({"run", scenario.string(), "--out", (dir / "flag").string()}) == 0);
  ::unsetenv("FORMATION_OUT_DIR");
  CHECK(fs::exists(dir / "flag" / "lyapunov.csv"));
  CHECK_FALSE(fs::exists(dir / "ignored"));
}

TEST_CASE("compare pairs the baseline with the assignment run") {
  const fs::path dir = scratch("compare");
  const fs::path scenario = short_example(dir, 2.0);
  REQUIRE(call({"run", scenario.string(), "--no-assignment", "--out", (dir / "without").string()}) == 0);
  REQUIRE(call({"run", scenario.string(), "--out", (dir / "with").string()}) == 0);
  REQUIRE(call({"compare", (dir / "without").string(), (dir / "with").string(), "--out",
                (dir / "cmp.csv").string()}) == 0);
  std::istringstream csv(slurp(dir / "cmp.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,V_without,V_with");

  std::istringstream events(slurp(dir / "with" / "events.jsonl"));
  double first = -1.0;
  while (std::getline(events, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j["accepted"].get<bool>()) {
      first = j["t"].get<double>();
      break;
    }
  }
  REQUIRE(first > 0.0);
  int rows = 0;
  while (std::getline(csv, line)) {
    double t = 0, without = 0, with = 0;
    char c1 = 0, c2 = 0;
    std::istringstream row(line);
    row >> t >> c1 >> without >> c2 >> with;
    if (t >= first) CHECK(with <= without + 1e-9);
    ++rows;
  }
  CHECK(rows == 2001);
}

TEST_CASE("compare refuses mismatched grids") {
  const fs::path dir = scratch("compare_bad");
  REQUIRE(call({"run", short_example(dir, 0.2).string(), "--out", (dir / "a").string()}) == 0);
  REQUIRE(call({"run", short_example(dir, 0.3).string(), "--out", (dir / "b").string()}) == 0);
  CHECK(call({"compare", (dir / "a").string(), (dir / "b").string()}) == 1);
}

TEST_CASE("analyze reports stability") {
  const fs::path dir = scratch("analyze");
  REQUIRE(call({"analyze", oracle::scenario_path("example1.json"), "--out", (dir / "a.json").string()}) == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "a.json"));
  CHECK(j["spanning_tree"].get<bool>());
  CHECK(j["control_graph_within_range"].get<bool>());
  CHECK(j["spectral_abscissa"].get<double>() < 0.0);
  CHECK(j["lyapunov_residual"].get<double>() < 1e-8);
  CHECK(j["p_min_eigenvalue"].get<double>() > 0.0);
  CHECK(j["a1_eigenvalues"].size() == 30);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  CHECK(call({}) == 1);
  CHECK(call({"fly"}) == 1);
  CHECK(call({"run"}) == 1);
  CHECK(call({"run", (dir / "missing.json").string()}) == 1);

  std::ofstream(dir / "broken.json") << "{\n  \"schema_version\": 1,\n";
  CHECK(call({"run", (dir / "broken.json").string(), "--out", (dir / "x").string()}) == 1);

  nlohmann::json doc = nlohmann::json::parse(slurp(oracle::scenario_path("example1.json")));
  doc["dt"] = 0.1;
  doc["t_end"] = 50.0;
  doc["estimator"]["gamma1"] = 1e6;
  doc["estimator"]["gamma2"] = 1e6;
  doc["estimator"]["gamma3"] = 1e6;
  doc.erase("assignment");
  std::ofstream(dir / "diverge.json") << doc.dump();
  CHECK(call({"run", (dir / "diverge.json").string(), "--out", (dir / "y").string()}) == 2);
}
