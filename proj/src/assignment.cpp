#include "formation/assignment.hpp"

#include "formation/errors.hpp"

namespace formation {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Unordered pair number `index` in lexicographic order (1,2),(1,3),...
std::pair<AgentId, AgentId> pair_at(std::uint64_t index, int n) {
  AgentId a = 1;
  std::uint64_t row = static_cast<std::uint64_t>(n - 1);
  while (index >= row) {
    index -= row;
    ++a;
    --row;
  }
  return {a, a + 1 + static_cast<AgentId>(index)};
}

LeaderEstimate estimate_of(const EstimatorState& est, AgentId i) {
  return {est.p_hat.row(i - 1).transpose(), est.v_hat.row(i - 1).transpose()};
}

}  // namespace

std::string to_string(ExchangeReason r) {
  switch (r) {
    case ExchangeReason::Assumption6Failed:
      return "assumption6_failed";
    case ExchangeReason::NotImproving:
      return "not_improving";
    case ExchangeReason::Accepted:
      return "accepted";
  }
  return "unknown";
}

std::string to_string(PairPolicy p) {
  return p == PairPolicy::RoundRobin ? "round_robin" : "seeded_random";
}

std::pair<AgentId, AgentId> select_pair(const AssignmentSchedule& schedule, std::uint64_t k,
                                        int n) {
  if (n < 2) throw InputError("select_pair: need at least two followers");
  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  switch (schedule.policy) {
    case PairPolicy::RoundRobin:
      return pair_at(k % pairs, n);
    case PairPolicy::SeededRandom:
      return pair_at(splitmix64(schedule.seed ^ splitmix64(k)) % pairs, n);
  }
  throw InputError("select_pair: unknown policy");
}

double compounded_error(const Vec& e1_a, const Vec& e2_a, const Vec& e1_b, const Vec& e2_b) {
  return e1_a.squaredNorm() + e2_a.squaredNorm() + e1_b.squaredNorm() + e2_b.squaredNorm();
}

BreveErrors breve_errors(const AgentState& state_a, const AgentState& state_b,
                         const LeaderEstimate& est_a, const LeaderEstimate& est_b,
                         const Vec& goal_a_new, const Vec& goal_b_new, const ControlGains& gains,
                         AgentId alpha, AgentId beta) {
  BreveErrors out;
  agent_error_surfaces(state_a, est_a.p_hat, est_a.v_hat, goal_a_new, gains.k1[alpha - 1],
                       out.e1_alpha, out.e2_alpha);
  agent_error_surfaces(state_b, est_b.p_hat, est_b.v_hat, goal_b_new, gains.k1[beta - 1],
                       out.e1_beta, out.e2_beta);
  return out;
}

AssignmentOutcome assignment_step(double t_k, const CommGraph& comm, const ControlGraph& ctrl,
                                  const GoalMap& goals, const FleetState& fleet,
                                  const EstimatorState& est, const ControlGains& gains,
                                  std::pair<AgentId, AgentId> pair) {
  const auto [alpha, beta] = pair;
  AssignmentOutcome out{ctrl, goals, ExchangeEvent{}};
  out.event.tau = t_k;
  out.event.alpha = alpha;
  out.event.beta = beta;

  if (!check_assumption6(comm, ctrl, alpha, beta)) {
    out.event.reason = ExchangeReason::Assumption6Failed;
    return out;
  }

  const AgentState sa = fleet.agent(alpha);
  const AgentState sb = fleet.agent(beta);
  const LeaderEstimate ea = estimate_of(est, alpha);
  const LeaderEstimate eb = estimate_of(est, beta);

  Vec e1a, e2a, e1b, e2b;
  agent_error_surfaces(sa, ea.p_hat, ea.v_hat, goals.goal(alpha), gains.k1[alpha - 1], e1a, e2a);
  agent_error_surfaces(sb, eb.p_hat, eb.v_hat, goals.goal(beta), gains.k1[beta - 1], e1b, e2b);
  out.event.e_cur = compounded_error(e1a, e2a, e1b, e2b);

  const BreveErrors swapped =
      breve_errors(sa, sb, ea, eb, goals.goal(beta), goals.goal(alpha), gains, alpha, beta);
  out.event.e_new =
      compounded_error(swapped.e1_alpha, swapped.e2_alpha, swapped.e1_beta, swapped.e2_beta);

  if (!(out.event.e_cur > out.event.e_new)) {
    out.event.reason = ExchangeReason::NotImproving;
    return out;
  }

  // Build everything before committing anything.
  ControlGraph next_ctrl = exchange_neighbors(comm, ctrl, alpha, beta);
  GoalMap next_goals = goals.swapped(alpha, beta);
  out.ctrl = std::move(next_ctrl);
  out.goals = std::move(next_goals);
  out.event.accepted = true;
  out.event.reason = ExchangeReason::Accepted;
  return out;
}

}  // namespace formation
