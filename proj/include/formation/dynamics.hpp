#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "formation/errors.hpp"
#include "formation/types.hpp"

namespace formation {

/// Follower position/velocity in R^d.
struct AgentState {
  Vec p;
  Vec v;
};

/// Leader position, velocity, acceleration and jerk at one instant.
struct LeaderSignal {
  Vec p;
  Vec v;
  Vec u;
  Vec u_dot;
};

/// p0(t) = [speed*t, amplitude*sin(omega*t)]
struct PlanarSine {
  double speed = 0.2;
  double amplitude = 0.2;
  double omega = 0.5;
};

/// p0(t) = [r sin(wt), r cos(wt), climb*t + altitude]
struct Helix {
  double radius = 10.0;
  double omega = 0.5;
  double climb_rate = 1.0;
  double altitude = 30.0;
};

struct ConstantAcceleration {
  Vec p0;
  Vec v0;
  Vec a;
};

/// One coefficient list per axis, ascending powers of t.
struct Polynomial {
  std::vector<std::vector<double>> coefficients;
};

using LeaderTrajectory = std::variant<PlanarSine, Helix, ConstantAcceleration, Polynomial>;

int dimension(const LeaderTrajectory& traj);
std::string kind_name(const LeaderTrajectory& traj);

/// Closed-form signal and derivatives. Requires t >= 0.
LeaderSignal leader_signal(const LeaderTrajectory& traj, double t);

/// Declared bounds on ||u0|| and ||u0_dot||.
struct LeaderBounds {
  double accel = 0.0;
  double jerk = 0.0;
};

struct LeaderBoundsReport {
  double max_accel = 0.0;
  double max_jerk = 0.0;
  bool within(const LeaderBounds& b) const { return max_accel <= b.accel && max_jerk <= b.jerk; }
};

/// Samples the trajectory on [0, t_end] with step dt.
LeaderBoundsReport sample_leader_bounds(const LeaderTrajectory& traj, double t_end, double dt);

/// (p_dot, v_dot) = (v, u); returned as an AgentState-shaped derivative.
AgentState double_integrator_deriv(const AgentState& s, const Vec& u);

namespace detail {
inline void require_finite(const Vec& x, const char* stage) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw NumericError(std::string("rk4_step: non-finite derivative in stage ") + stage +
                             " at component " + std::to_string(i),
                         i);
    }
  }
}
}  // namespace detail

/// Classical fourth-order Runge-Kutta step of s' = f(t, s).
template <class F>
Vec rk4_step(F&& f, const Vec& s, double t, double dt) {
  if (!(dt > 0.0)) throw InputError("rk4_step: dt must be positive");
  const double half = 0.5 * dt;
  Vec k1 = f(t, s);
  detail::require_finite(k1, "k1");
  Vec k2 = f(t + half, Vec(s + half * k1));
  detail::require_finite(k2, "k2");
  Vec k3 = f(t + half, Vec(s + half * k2));
  detail::require_finite(k3, "k3");
  Vec k4 = f(t + dt, Vec(s + dt * k3));
  detail::require_finite(k4, "k4");
  return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace formation
