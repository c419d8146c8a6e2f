#include "formation/quadrotor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "formation/errors.hpp"

namespace formation {

void QuadParams::validate() const {
  for (double x : {mass, gravity, ixx, iyy, izz, arm}) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw InputError("QuadParams: physical parameters must be positive and finite");
    }
  }
}

std::array<double, QuadState::kSize> QuadState::to_array() const {
  return {position.x(), position.y(), position.z(), velocity.x(), velocity.y(), velocity.z(),
          attitude.x(), attitude.y(), attitude.z(), rates.x(),    rates.y(),    rates.z()};
}

QuadState QuadState::from_array(const double* x) {
  QuadState s;
  s.position = {x[0], x[1], x[2]};
  s.velocity = {x[3], x[4], x[5]};
  s.attitude = {x[6], x[7], x[8]};
  s.rates = {x[9], x[10], x[11]};
  return s;
}

void AttitudeGains::validate() const {
  if (!(lambda.minCoeff() > 0.0) || !(k.minCoeff() > 0.0) || !(boundary_layer > 0.0)) {
    throw InputError("AttitudeGains: gains and boundary layer must be positive");
  }
}

QuadState quad_deriv(const QuadState& s, const QuadInputs& u, const QuadParams& params) {
  const double phi = s.attitude.x();
  const double theta = s.attitude.y();
  const double psi = s.attitude.z();
  const double dphi = s.rates.x();
  const double dtheta = s.rates.y();
  const double dpsi = s.rates.z();
  const double thrust_per_mass = u.u_z / params.mass;

  QuadState d;
  d.position = s.velocity;
  d.velocity.x() =
      (std::cos(phi) * std::sin(theta) * std::cos(psi) + std::sin(phi) * std::sin(psi)) *
      thrust_per_mass;
  d.velocity.y() =
      (std::cos(phi) * std::sin(theta) * std::sin(psi) - std::sin(phi) * std::cos(psi)) *
      thrust_per_mass;
  d.velocity.z() = -params.gravity + std::cos(phi) * std::cos(theta) * thrust_per_mass;
  d.attitude = s.rates;
  d.rates.x() = params.a1() * dtheta * dpsi + params.b1() * u.u_phi;
  d.rates.y() = params.a2() * dphi * dpsi + params.b2() * u.u_theta;
  d.rates.z() = params.a3() * dphi * dtheta + params.b3() * u.u_psi;
  return d;
}

DesiredAttitude desired_attitude(double ux, double uy, double uz, double psi_d, double g) {
  const double w = uz + g;
  if (std::abs(w) < 1e-9) {
    throw NumericError("desired_attitude: vertical command cancels gravity (free fall)");
  }
  DesiredAttitude out;
  out.theta = std::atan((std::cos(psi_d) * ux + std::sin(psi_d) * uy) / w);
  out.phi = std::atan(std::cos(out.theta) * (std::sin(psi_d) * ux - std::cos(psi_d) * uy) / w);
  return out;
}

double total_thrust(double ux, double uy, double uz, double m, double g) {
  return m * std::sqrt(ux * ux + uy * uy + (uz + g) * (uz + g));
}

Eigen::Vector3d sliding_surfaces(const QuadState& s, const AttitudeReference& ref,
                                 const AttitudeGains& gains) {
  return (s.rates - ref.rate) + gains.lambda.cwiseProduct(s.attitude - ref.angle);
}

Eigen::Vector3d sliding_attitude_control(const QuadState& s, const AttitudeReference& ref,
                                         const AttitudeGains& gains, const QuadParams& params) {
  const Eigen::Vector3d surf = sliding_surfaces(s, ref, gains);
  Eigen::Vector3d switching;
  for (int axis = 0; axis < 3; ++axis) {
    if (gains.use_sign) {
      switching[axis] = surf[axis] > 0.0 ? 1.0 : (surf[axis] < 0.0 ? -1.0 : 0.0);
    } else {
      switching[axis] = std::clamp(surf[axis] / gains.boundary_layer, -1.0, 1.0);
    }
  }
  const double dphi = s.rates.x();
  const double dtheta = s.rates.y();
  const double dpsi = s.rates.z();
  const Eigen::Vector3d coupling(params.a1() * dtheta * dpsi, params.a2() * dphi * dpsi,
                                 params.a3() * dphi * dtheta);
  const Eigen::Vector3d b(params.b1(), params.b2(), params.b3());
  const Eigen::Vector3d numerator = -coupling - gains.k.cwiseProduct(switching) -
                                    gains.lambda.cwiseProduct(s.rates - ref.rate) + ref.accel;
  return numerator.cwiseQuotient(b);
}

AttitudeReference filter_output(const FilterState& f, const Eigen::Vector3d& raw,
                                const ReferenceFilter& filter) {
  const double w = filter.natural_frequency;
  AttitudeReference ref;
  ref.angle = f.angle;
  ref.rate = f.rate;
  ref.accel = w * w * (raw - f.angle) - 2.0 * filter.damping * w * f.rate;
  return ref;
}

FilterState filter_deriv(const FilterState& f, const Eigen::Vector3d& raw,
                         const ReferenceFilter& filter) {
  const AttitudeReference ref = filter_output(f, raw, filter);
  return {ref.rate, ref.accel};
}

FleetState translational_fleet(const std::vector<QuadState>& quads) {
  const int n = static_cast<int>(quads.size());
  FleetState fleet{Mat(n, 3), Mat(n, 3)};
  for (int i = 0; i < n; ++i) {
    fleet.p.row(i) = quads[i].position.transpose();
    fleet.v.row(i) = quads[i].velocity.transpose();
  }
  return fleet;
}

std::vector<QuadCommand> quad_outer_loop(const std::vector<QuadState>& quads,
                                         const std::vector<FilterState>& filters,
                                         const EstimatorState& est, const GoalMap& goals,
                                         const ControlGains& gains, const QuadLoopConfig& cfg) {
  if (filters.size() != quads.size()) {
    throw InputError("quad_outer_loop: one reference filter per quad required");
  }
  const Mat u = formation_controls(translational_fleet(quads), est, goals, gains);
  const double g = cfg.params.gravity;
  std::vector<QuadCommand> out(quads.size());
  for (std::size_t i = 0; i < quads.size(); ++i) {
    const double ux = u(i, 0);
    const double uy = u(i, 1);
    const double uz = u(i, 2);
    const DesiredAttitude att = desired_attitude(ux, uy, uz, cfg.psi_d, g);
    QuadCommand& cmd = out[i];
    cmd.virtual_input = {ux, uy, uz};
    cmd.raw_attitude = {att.phi, att.theta, cfg.psi_d};
    const AttitudeReference ref = filter_output(filters[i], cmd.raw_attitude, cfg.filter);
    const Eigen::Vector3d moments = sliding_attitude_control(quads[i], ref, cfg.attitude, cfg.params);
    cmd.inputs.u_phi = moments.x();
    cmd.inputs.u_theta = moments.y();
    cmd.inputs.u_psi = moments.z();
    cmd.inputs.u_z = total_thrust(ux, uy, uz, cfg.params.mass, g);
  }
  return out;
}

}  // namespace formation
