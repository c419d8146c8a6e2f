#include "formation/controller.hpp"

#include <algorithm>
#include <string>

#include "formation/errors.hpp"

namespace formation {

AgentState FleetState::agent(AgentId i) const {
  if (i < 1 || i > size()) throw InputError("FleetState: no follower " + std::to_string(i));
  return {p.row(i - 1).transpose(), v.row(i - 1).transpose()};
}

ControlGains ControlGains::uniform(int n, double k1, double k2) {
  ControlGains g{Vec::Constant(n, k1), Vec::Constant(n, k2)};
  g.validate();
  return g;
}

double ControlGains::k_min() const { return std::min(k1.minCoeff(), k2.minCoeff()); }

void ControlGains::validate() const {
  if (k1.size() != k2.size()) throw InputError("ControlGains: k1 and k2 lengths differ");
  if (k1.size() == 0) return;
  if (!k1.allFinite() || !k2.allFinite() || !(k_min() > 0.0)) {
    throw InputError("ControlGains: gains must be finite and strictly positive");
  }
}

Vec virtual_control(const Vec& e1, const Vec& v_hat, double k1) { return -k1 * e1 + v_hat; }

Vec virtual_control_rate(const Vec& e1, const Vec& e2, const Vec& u_hat, double k1) {
  return -k1 * (-k1 * e1 + e2) + u_hat;
}

Vec actual_control(const Vec& e1, const Vec& e2, const Vec& zeta_dot, double k2) {
  return -k2 * e2 - e1 + zeta_dot;
}

void agent_error_surfaces(const AgentState& s, const Vec& p_hat, const Vec& v_hat,
                          const Vec& goal, double k1, Vec& e1, Vec& e2) {
  e1 = s.p - p_hat - goal;
  e2 = s.v - virtual_control(e1, v_hat, k1);
}

namespace {

void require_consistent(const FleetState& fleet, const EstimatorState& est, const GoalMap& goals,
                        const ControlGains& gains) {
  const int n = fleet.size();
  if (est.size() != n || goals.size() != n || gains.size() != n || fleet.v.rows() != n) {
    throw InputError("controller: follower counts disagree");
  }
  if (est.dim() != fleet.dim() || goals.dim() != fleet.dim()) {
    throw InputError("controller: dimensions disagree");
  }
}

}  // namespace

ErrorSurfaces error_surfaces(const FleetState& fleet, const EstimatorState& est,
                             const GoalMap& goals, const ControlGains& gains) {
  require_consistent(fleet, est, goals, gains);
  ErrorSurfaces out;
  out.e1 = fleet.p - est.p_hat - goals.goals();
  // e2 = v - ζ = v + k1 e1 - v̂
  out.e2 = fleet.v + gains.k1.asDiagonal() * out.e1 - est.v_hat;
  return out;
}

Mat formation_controls(const FleetState& fleet, const EstimatorState& est, const GoalMap& goals,
                       const ControlGains& gains) {
  const ErrorSurfaces e = error_surfaces(fleet, est, goals, gains);
  Mat u(fleet.size(), fleet.dim());
  for (int i = 0; i < fleet.size(); ++i) {
    const Vec e1 = e.e1.row(i).transpose();
    const Vec e2 = e.e2.row(i).transpose();
    const Vec zeta_dot = virtual_control_rate(e1, e2, est.u_hat.row(i).transpose(), gains.k1[i]);
    u.row(i) = actual_control(e1, e2, zeta_dot, gains.k2[i]).transpose();
  }
  return u;
}

double lyapunov_V(const ErrorSurfaces& e) {
  return 0.5 * e.e1.squaredNorm() + 0.5 * e.e2.squaredNorm();
}

Mat global_formation_error(const FleetState& fleet, const LeaderSignal& leader,
                           const GoalMap& goals) {
  if (goals.size() != fleet.size() || leader.p.size() != fleet.dim()) {
    throw InputError("global_formation_error: shape mismatch");
  }
  return (fleet.p - goals.goals()).rowwise() - leader.p.transpose();
}

}  // namespace formation
