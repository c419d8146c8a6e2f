#pragma once

#include "formation/dynamics.hpp"
#include "formation/estimator.hpp"
#include "formation/goal_map.hpp"
#include "formation/types.hpp"

namespace formation {

/// Positions and velocities of all followers; row i is follower i+1.
struct FleetState {
  Mat p;
  Mat v;

  int size() const { return static_cast<int>(p.rows()); }
  int dim() const { return static_cast<int>(p.cols()); }
  AgentState agent(AgentId i) const;
};

struct ControlGains {
  Vec k1;
  Vec k2;

  static ControlGains uniform(int n, double k1, double k2);
  int size() const { return static_cast<int>(k1.size()); }
  /// k_m = min over all k_{i,1}, k_{i,2}.
  double k_min() const;
  void validate() const;
};

/// Backstepping coordinates e1 = p - p̂ - p*, e2 = v - ζ.
struct ErrorSurfaces {
  Mat e1;
  Mat e2;
};

Vec virtual_control(const Vec& e1, const Vec& v_hat, double k1);

/// ζ̇ = -k1(-k1 e1 + e2) + û, the exact derivative of ζ with p* held constant.
Vec virtual_control_rate(const Vec& e1, const Vec& e2, const Vec& u_hat, double k1);

Vec actual_control(const Vec& e1, const Vec& e2, const Vec& zeta_dot, double k2);

/// Surfaces of a single follower against an arbitrary goal.
void agent_error_surfaces(const AgentState& s, const Vec& p_hat, const Vec& v_hat,
                          const Vec& goal, double k1, Vec& e1, Vec& e2);

ErrorSurfaces error_surfaces(const FleetState& fleet, const EstimatorState& est,
                             const GoalMap& goals, const ControlGains& gains);

/// Per-follower control inputs, N x d.
Mat formation_controls(const FleetState& fleet, const EstimatorState& est, const GoalMap& goals,
                       const ControlGains& gains);

/// V = ½||e1||² + ½||e2||²
double lyapunov_V(const ErrorSurfaces& e);

/// δ_i = p_i - p0 - p*_i
Mat global_formation_error(const FleetState& fleet, const LeaderSignal& leader,
                           const GoalMap& goals);

}  // namespace formation
