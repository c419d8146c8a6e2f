#pragma once

#include "formation/dynamics.hpp"
#include "formation/graph.hpp"
#include "formation/types.hpp"

namespace formation {

/// Per-follower estimates of the leader signals; row i is follower i+1.
struct EstimatorState {
  Mat p_hat;
  Mat v_hat;
  Mat u_hat;

  int size() const { return static_cast<int>(p_hat.rows()); }
  int dim() const { return static_cast<int>(p_hat.cols()); }
};

struct EstimatorGains {
  Vec gamma1;
  Vec gamma2;
  Vec gamma3;

  static EstimatorGains uniform(int n, double g1, double g2, double g3);
  int size() const { return static_cast<int>(gamma1.size()); }
  /// Throws InputError unless every gain is strictly positive.
  void validate() const;
};

struct EstimationErrors {
  Mat p_tilde;
  Mat v_tilde;
  Mat u_tilde;
};

/// Time derivative of the distributed third-order leader estimator. Leader
/// terms enter only through followers with a leader edge.
EstimatorState estimator_deriv(const EstimatorState& est, const ControlGraph& ctrl,
                               const LeaderSignal& leader, const EstimatorGains& gains);

EstimationErrors estimation_errors(const EstimatorState& est, const LeaderSignal& leader);

/// q = [p̃; ṽ; ũ], each block stacked agent-major (size 3dN).
Vec stack_errors(const EstimationErrors& err);

/// Companion-block matrix of the stacked estimation error dynamics
/// q' = A1 q + A2 (size 3dN).
Mat build_A1(const GraphMatrices& m, const EstimatorGains& gains, int d);
/// Forcing term [0; 0; -1_N ⊗ u0_dot].
Vec build_A2(int n, const LeaderSignal& leader);

/// Largest real part of the spectrum.
double spectral_abscissa(const Mat& a);

/// Solves AᵀP + PA = -Q for a Hurwitz A and symmetric positive definite Q.
/// Small systems go through the Kronecker-vectorised linear solve, larger
/// ones through a complex Schur (Bartels-Stewart) back substitution.
Mat lyapunov_solve(const Mat& a, const Mat& q);

/// The two routes of lyapunov_solve, exposed for cross-checking.
Mat lyapunov_solve_kronecker(const Mat& a, const Mat& q);
Mat lyapunov_solve_schur(const Mat& a, const Mat& q);

/// ||AᵀP + PA + Q||_F
double lyapunov_residual(const Mat& a, const Mat& p, const Mat& q);

/// Largest matrix size routed to the Kronecker solve.
inline constexpr int kKroneckerLyapunovLimit = 48;

}  // namespace formation
