#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "formation/errors.hpp"
#include "formation/output.hpp"
#include "formation/scenario.hpp"
#include "formation/simulation.hpp"

namespace formation {

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeAbort = 2;

constexpr const char* kOutDirEnv = "FORMATION_OUT_DIR";

std::filesystem::path resolve_out_dir(const std::string& flag, const std::string& scenario_name) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return std::filesystem::path("runs") / scenario_name;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Leader-following formation control with distributed goal assignment"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  int log_every = 0;
  bool no_assignment = false;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write trajectory, Lyapunov and event logs");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, std::string("Output directory (default $") + kOutDirEnv + " or runs/<name>)");
  run->add_option("--log-every", log_every, "Log every n-th integration step")->check(CLI::PositiveNumber);
  run->add_flag("--no-assignment", no_assignment, "Disable goal assignment (baseline run)");

  std::string analyze_path;
  std::string analyze_out;
  auto* analyze = app.add_subcommand("analyze", "Spanning-tree verdict, estimator spectrum and Lyapunov residual");
  analyze->add_option("scenario", analyze_path, "Scenario JSON file")->required();
  analyze->add_option("--out", analyze_out, "Write the JSON report to a file instead of stdout");

  std::string run_a;
  std::string run_b;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Pair the V(t) traces of two runs (without, with assignment)");
  compare->add_option("run_without", run_a, "Run directory or lyapunov.csv of the baseline")->required();
  compare->add_option("run_with", run_b, "Run directory or lyapunov.csv with assignment")->required();
  compare->add_option("--out", compare_out, "Write the CSV to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run) {
      const ScenarioConfig cfg = load_scenario(scenario_path);
      RunOptions options;
      options.log_every = log_every;
      if (no_assignment) options.assignment = false;
      const RunLog log = run_scenario(cfg, options);
      const std::filesystem::path dir = resolve_out_dir(out_dir, cfg.name);
      write_run(log, dir);
      for (const std::string& w : log.warnings) std::cerr << "warning: " << w << '\n';
      const RunMetrics m = compute_metrics(log);
      std::cout << cfg.name << ": " << log.records.size() << " records, " << m.exchange_count
                << " accepted exchanges of " << m.proposal_count << " proposals, final V "
                << format_double(m.final_V) << " -> " << dir.string() << '\n';
    } else if (*analyze) {
      const ScenarioConfig cfg = load_scenario(analyze_path);
      const std::string report = analyze_scenario(cfg).dump(2);
      if (analyze_out.empty()) {
        std::cout << report << '\n';
      } else {
        std::ofstream out(analyze_out);
        if (!out) throw Error("cannot write " + analyze_out);
        out << report << '\n';
      }
    } else if (*compare) {
      const LyapunovSeries without = read_lyapunov_csv(run_a);
      const LyapunovSeries with = read_lyapunov_csv(run_b);
      if (compare_out.empty()) {
        write_comparison_csv(without, with, std::cout);
      } else {
        std::ofstream out(compare_out);
        if (!out) throw Error("cannot write " + compare_out);
        write_comparison_csv(without, with, out);
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime abort: " << e.what() << '\n';
    return kRuntimeAbort;
  }
  return kOk;
}

}  // namespace formation
