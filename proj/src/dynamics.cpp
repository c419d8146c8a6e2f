#include "formation/dynamics.hpp"

#include <cmath>

namespace formation {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

LeaderSignal make_signal(int d) {
  return {Vec::Zero(d), Vec::Zero(d), Vec::Zero(d), Vec::Zero(d)};
}

// sum_k c_k * k!/(k-order)! * t^(k-order)
double poly_derivative(const std::vector<double>& c, int order, double t) {
  double value = 0.0;
  for (int k = static_cast<int>(c.size()) - 1; k >= order; --k) {
    double factor = 1.0;
    for (int j = 0; j < order; ++j) factor *= static_cast<double>(k - j);
    value = value * t + c[k] * factor;
  }
  return value;
}

}  // namespace

int dimension(const LeaderTrajectory& traj) {
  return std::visit(overloaded{
                        [](const PlanarSine&) { return 2; },
                        [](const Helix&) { return 3; },
                        [](const ConstantAcceleration& c) { return static_cast<int>(c.p0.size()); },
                        [](const Polynomial& p) { return static_cast<int>(p.coefficients.size()); },
                    },
                    traj);
}

std::string kind_name(const LeaderTrajectory& traj) {
  return std::visit(overloaded{
                        [](const PlanarSine&) { return std::string("planar_sine"); },
                        [](const Helix&) { return std::string("helix"); },
                        [](const ConstantAcceleration&) { return std::string("constant_acceleration"); },
                        [](const Polynomial&) { return std::string("polynomial"); },
                    },
                    traj);
}

LeaderSignal leader_signal(const LeaderTrajectory& traj, double t) {
  if (!(t >= 0.0)) throw InputError("leader_signal: t must be non-negative");
  return std::visit(
      overloaded{
          [t](const PlanarSine& s) {
            LeaderSignal out = make_signal(2);
            const double w = s.omega;
            const double sn = std::sin(w * t);
            const double cs = std::cos(w * t);
            out.p << s.speed * t, s.amplitude * sn;
            out.v << s.speed, s.amplitude * w * cs;
            out.u << 0.0, -s.amplitude * w * w * sn;
            out.u_dot << 0.0, -s.amplitude * w * w * w * cs;
            return out;
          },
          [t](const Helix& h) {
            LeaderSignal out = make_signal(3);
            const double w = h.omega;
            const double r = h.radius;
            const double sn = std::sin(w * t);
            const double cs = std::cos(w * t);
            out.p << r * sn, r * cs, h.climb_rate * t + h.altitude;
            out.v << r * w * cs, -r * w * sn, h.climb_rate;
            out.u << -r * w * w * sn, -r * w * w * cs, 0.0;
            out.u_dot << -r * w * w * w * cs, r * w * w * w * sn, 0.0;
            return out;
          },
          [t](const ConstantAcceleration& c) {
            const int d = static_cast<int>(c.p0.size());
            if (c.v0.size() != d || c.a.size() != d) {
              throw InputError("constant_acceleration leader: p0, v0 and a sizes differ");
            }
            LeaderSignal out = make_signal(d);
            out.p = c.p0 + c.v0 * t + 0.5 * c.a * t * t;
            out.v = c.v0 + c.a * t;
            out.u = c.a;
            return out;
          },
          [t](const Polynomial& poly) {
            const int d = static_cast<int>(poly.coefficients.size());
            LeaderSignal out = make_signal(d);
            for (int axis = 0; axis < d; ++axis) {
              const auto& c = poly.coefficients[axis];
              out.p[axis] = poly_derivative(c, 0, t);
              out.v[axis] = poly_derivative(c, 1, t);
              out.u[axis] = poly_derivative(c, 2, t);
              out.u_dot[axis] = poly_derivative(c, 3, t);
            }
            return out;
          },
      },
      traj);
}

LeaderBoundsReport sample_leader_bounds(const LeaderTrajectory& traj, double t_end, double dt) {
  if (!(dt > 0.0)) throw InputError("sample_leader_bounds: dt must be positive");
  LeaderBoundsReport report;
  const auto steps = static_cast<long>(std::floor(t_end / dt + 1e-9));
  for (long n = 0; n <= steps; ++n) {
    const LeaderSignal s = leader_signal(traj, static_cast<double>(n) * dt);
    report.max_accel = std::max(report.max_accel, s.u.norm());
    report.max_jerk = std::max(report.max_jerk, s.u_dot.norm());
  }
  return report;
}

AgentState double_integrator_deriv(const AgentState& s, const Vec& u) {
  if (s.p.size() != s.v.size() || s.v.size() != u.size()) {
    throw InputError("double_integrator_deriv: dimension mismatch");
  }
  return {s.v, u};
}

}  // namespace formation
