#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "formation/controller.hpp"
#include "formation/estimator.hpp"
#include "formation/goal_map.hpp"

namespace formation {

/// Rigid-body parameters; defaults are the small quadrotor used in the
/// 14-agent scenario.
struct QuadParams {
  double mass = 0.486;      // kg
  double gravity = 9.81;    // m/s²
  double ixx = 3.827e-3;    // kg m²
  double iyy = 3.827e-3;
  double izz = 7.6566e-3;
  double arm = 0.1;         // m

  double a1() const { return (iyy - izz) / ixx; }
  double a2() const { return (izz - ixx) / iyy; }
  double a3() const { return (ixx - iyy) / izz; }
  double b1() const { return arm / ixx; }
  double b2() const { return arm / iyy; }
  double b3() const { return 1.0 / izz; }

  void validate() const;
};

struct QuadState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d attitude = Eigen::Vector3d::Zero();  // phi, theta, psi
  Eigen::Vector3d rates = Eigen::Vector3d::Zero();     // phi_dot, theta_dot, psi_dot

  static constexpr int kSize = 12;
  std::array<double, kSize> to_array() const;
  static QuadState from_array(const double* x);
};

struct QuadInputs {
  double u_phi = 0.0;
  double u_theta = 0.0;
  double u_psi = 0.0;
  double u_z = 0.0;  // total thrust, N
};

struct AttitudeGains {
  Eigen::Vector3d lambda = Eigen::Vector3d::Constant(100.0);
  Eigen::Vector3d k = Eigen::Vector3d::Constant(5.0);
  double boundary_layer = 0.01;
  /// Pure sign() switching instead of the boundary-layer saturation.
  bool use_sign = false;

  void validate() const;
};

/// Rigid-body model; the returned struct holds the time derivative of each field.
QuadState quad_deriv(const QuadState& s, const QuadInputs& u, const QuadParams& params);

struct DesiredAttitude {
  double phi = 0.0;
  double theta = 0.0;
};

/// Roll/pitch that align the thrust with the commanded acceleration. Throws
/// NumericError when uz + g is (numerically) zero.
DesiredAttitude desired_attitude(double ux, double uy, double uz, double psi_d, double g);

/// U_z = m sqrt(ux² + uy² + (uz + g)²)
double total_thrust(double ux, double uy, double uz, double m, double g);

/// Reference angle with its first two derivatives, per axis (phi, theta, psi).
struct AttitudeReference {
  Eigen::Vector3d angle = Eigen::Vector3d::Zero();
  Eigen::Vector3d rate = Eigen::Vector3d::Zero();
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();
};

/// s_q = (q̇ - q̇_d) + λ_q (q - q_d)
Eigen::Vector3d sliding_surfaces(const QuadState& s, const AttitudeReference& ref,
                                 const AttitudeGains& gains);

/// Moments (U_phi, U_theta, U_psi) of the sliding-mode attitude law.
Eigen::Vector3d sliding_attitude_control(const QuadState& s, const AttitudeReference& ref,
                                         const AttitudeGains& gains, const QuadParams& params);

/// Critically damped second-order low-pass that turns raw attitude commands
/// into a smooth reference with consistent derivatives.
struct ReferenceFilter {
  double natural_frequency = 50.0;  // rad/s
  double damping = 1.0;
};

struct FilterState {
  Eigen::Vector3d angle = Eigen::Vector3d::Zero();
  Eigen::Vector3d rate = Eigen::Vector3d::Zero();
};

AttitudeReference filter_output(const FilterState& f, const Eigen::Vector3d& raw,
                                const ReferenceFilter& filter);
FilterState filter_deriv(const FilterState& f, const Eigen::Vector3d& raw,
                         const ReferenceFilter& filter);

struct QuadCommand {
  QuadInputs inputs;
  Eigen::Vector3d raw_attitude = Eigen::Vector3d::Zero();  // unfiltered (phi_d, theta_d, psi_d)
  Eigen::Vector3d virtual_input = Eigen::Vector3d::Zero();  // (ux, uy, uz)
};

struct QuadLoopConfig {
  QuadParams params;
  AttitudeGains attitude;
  ReferenceFilter filter;
  double psi_d = 0.0;
};

/// Translational abstraction of the fleet (positions/velocities as a FleetState).
FleetState translational_fleet(const std::vector<QuadState>& quads);

/// Full input vector of every quad: the formation controller runs on the
/// translational double-integrator abstraction, its acceleration command is
/// inverted into roll/pitch targets and thrust, and the sliding-mode law
/// tracks the filtered attitude reference.
std::vector<QuadCommand> quad_outer_loop(const std::vector<QuadState>& quads,
                                         const std::vector<FilterState>& filters,
                                         const EstimatorState& est, const GoalMap& goals,
                                         const ControlGains& gains, const QuadLoopConfig& cfg);

}  // namespace formation
