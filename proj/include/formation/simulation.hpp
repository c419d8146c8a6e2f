#pragma once

#include <optional>
#include <string>
#include <vector>

#include "formation/assignment.hpp"
#include "formation/scenario.hpp"

namespace formation {

/// Snapshot of the closed loop at one logged grid time. Goal-dependent
/// quantities use the goals in force at t (after any exchange at t).
struct LogRecord {
  double t = 0.0;
  FleetState fleet;
  EstimatorState est;
  ErrorSurfaces surfaces;
  Mat goals;
  Mat delta;    // global formation error
  Mat p_tilde;  // leader position estimation error
  double V = 0.0;
  Mat attitude;  // quadrotor only, N x 3
};

/// Assignment proposal plus the Lyapunov value on either side of t_k.
struct EventRecord {
  ExchangeEvent event;
  double v_before = 0.0;
  double v_after = 0.0;
};

struct RunLog {
  std::string scenario;
  bool assignment_enabled = false;
  double k_min = 0.0;
  std::vector<LogRecord> records;
  std::vector<EventRecord> events;
  std::vector<std::string> warnings;
  ControlGraph final_graph;
  GoalMap final_goals;

  std::vector<EventRecord> accepted_events() const;
};

struct RunOptions {
  /// Overrides the scenario's assignment setting when set.
  std::optional<bool> assignment;
  /// Overrides the scenario's log decimation when > 0.
  int log_every = 0;
};

/// Fixed-step closed-loop simulation with goal assignment at the scheduled
/// instants. Identical inputs give bit-identical logs. Throws RuntimeAbort if
/// the control graph loses its spanning tree or the integration blows up.
RunLog run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

/// Initial estimator state for the scenario's seeding mode.
EstimatorState initial_estimator(const ScenarioConfig& cfg);

struct RunMetrics {
  std::vector<double> final_delta_norm;
  double final_max_delta = 0.0;
  double final_max_p_tilde = 0.0;
  double final_V = 0.0;
  double v_threshold = 0.0;
  std::optional<double> time_to_threshold;
  std::size_t exchange_count = 0;
  std::size_t proposal_count = 0;
  std::optional<double> min_distance;
  std::optional<double> max_distance;
  double integral_V = 0.0;  // trapezoidal over the log grid
};

RunMetrics compute_metrics(const RunLog& log, double v_threshold = 1e-3);

}  // namespace formation
