#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "formation/scenario.hpp"
#include "formation/simulation.hpp"

namespace formation {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

/// t, then per agent p, v, e1, e2 components, then V.
void write_trajectory_csv(const RunLog& log, std::ostream& out);
void write_lyapunov_csv(const RunLog& log, std::ostream& out);
/// One JSON object per assignment proposal.
void write_events_jsonl(const RunLog& log, std::ostream& out);
nlohmann::json metrics_json(const RunLog& log, const RunMetrics& m);

/// Writes trajectory.csv, lyapunov.csv, events.jsonl and summary.json.
void write_run(const RunLog& log, const std::filesystem::path& dir);

/// Spanning-tree verdict, H spectrum bound, A1 spectrum and Lyapunov residual
/// for the scenario's initial control graph.
nlohmann::json analyze_scenario(const ScenarioConfig& cfg);

struct LyapunovSeries {
  std::vector<double> t;
  std::vector<double> v;
};

/// Reads lyapunov.csv from a run directory (or the file itself).
LyapunovSeries read_lyapunov_csv(const std::filesystem::path& run);

/// Paired CSV "t,V_without,V_with"; both runs must share the time grid.
void write_comparison_csv(const LyapunovSeries& without, const LyapunovSeries& with,
                          std::ostream& out);

}  // namespace formation
