#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "formation/controller.hpp"
#include "formation/estimator.hpp"
#include "formation/goal_map.hpp"
#include "formation/graph.hpp"

namespace formation {

enum class PairPolicy { RoundRobin, SeededRandom };

struct AssignmentSchedule {
  double period = 0.05;  // s between assignment instants t_k
  PairPolicy policy = PairPolicy::RoundRobin;
  std::uint64_t seed = 0;
};

enum class ExchangeReason { Assumption6Failed, NotImproving, Accepted };

std::string to_string(ExchangeReason r);
std::string to_string(PairPolicy p);

struct ExchangeEvent {
  double tau = 0.0;
  AgentId alpha = 0;
  AgentId beta = 0;
  double e_cur = 0.0;
  double e_new = 0.0;
  bool accepted = false;
  ExchangeReason reason = ExchangeReason::NotImproving;
};

/// Pair proposed at instant k. Round robin walks (1,2),(1,3),...,(N-1,N)
/// cyclically; seeded random hashes (seed, k) so any instant can be
/// evaluated without replaying the earlier ones.
std::pair<AgentId, AgentId> select_pair(const AssignmentSchedule& schedule, std::uint64_t k,
                                        int n);

/// Σ_j ||e_{α,j}||² + ||e_{β,j}||²
double compounded_error(const Vec& e1_a, const Vec& e2_a, const Vec& e1_b, const Vec& e2_b);

/// One follower's leader estimate as used by the swap test.
struct LeaderEstimate {
  Vec p_hat;
  Vec v_hat;
};

struct BreveErrors {
  Vec e1_alpha;
  Vec e2_alpha;
  Vec e1_beta;
  Vec e2_beta;
};

/// Surfaces the pair would have under the swapped goals, each agent using its
/// own leader estimate.
BreveErrors breve_errors(const AgentState& state_a, const AgentState& state_b,
                         const LeaderEstimate& est_a, const LeaderEstimate& est_b,
                         const Vec& goal_a_new, const Vec& goal_b_new, const ControlGains& gains,
                         AgentId alpha, AgentId beta);

struct AssignmentOutcome {
  ControlGraph ctrl;
  GoalMap goals;
  ExchangeEvent event;
};

/// One pass of the distributed goal assignment for the pair (alpha, beta),
/// evaluated on the left-limit state at t_k. Either the neighbor sets, leader
/// flags and goals all change, or nothing does.
AssignmentOutcome assignment_step(double t_k, const CommGraph& comm, const ControlGraph& ctrl,
                                  const GoalMap& goals, const FleetState& fleet,
                                  const EstimatorState& est, const ControlGains& gains,
                                  std::pair<AgentId, AgentId> pair);

}  // namespace formation
