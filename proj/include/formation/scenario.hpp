#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "formation/assignment.hpp"
#include "formation/controller.hpp"
#include "formation/dynamics.hpp"
#include "formation/estimator.hpp"
#include "formation/graph.hpp"
#include "formation/quadrotor.hpp"

namespace formation {

inline constexpr int kScenarioSchemaVersion = 1;

enum class PlantKind { DoubleIntegrator, Quadrotor };

/// How p̂, v̂, û start. OwnPosition seeds p̂_i with p_i(0) and zero rates;
/// LeaderInitial seeds every follower with the leader signal at t = 0.
enum class EstimatorInit { OwnPosition, Zero, LeaderInitial };

struct ScenarioConfig {
  std::string name;
  int dim = 2;
  PlantKind plant = PlantKind::DoubleIntegrator;
  LeaderTrajectory leader = PlanarSine{};
  std::optional<LeaderBounds> leader_bounds;

  Mat initial_positions;   // N x d
  Mat initial_velocities;  // N x d
  Mat initial_goals;       // N x d, G_i
  ControlGraph control_graph;
  double comm_range = 1.0;

  double dt = 1e-3;
  double t_end = 1.0;
  ControlGains control_gains;
  EstimatorGains estimator_gains;
  EstimatorInit estimator_init = EstimatorInit::OwnPosition;
  std::optional<AssignmentSchedule> assignment;  // nullopt: disabled
  QuadLoopConfig quad;
  /// 0 selects the default: every step for N <= 20, every 10th otherwise.
  int log_every = 0;

  int size() const { return static_cast<int>(initial_positions.rows()); }
  int effective_log_every() const;
  /// Throws ConfigError if an invariant of the scenario does not hold.
  void validate() const;
};

std::string to_string(PlantKind p);
std::string to_string(EstimatorInit e);

/// Parses and validates a scenario document. `source` names the document in
/// diagnostics.
ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "<scenario>");
ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace formation
