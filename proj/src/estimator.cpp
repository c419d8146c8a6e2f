#include "formation/estimator.hpp"

#include <complex>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "formation/errors.hpp"

namespace formation {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Vec flatten(const Mat& m) {
  RowMat r = m;
  return Eigen::Map<const Vec>(r.data(), r.size());
}

void require_shape(const Mat& m, int n, int d, const char* what) {
  if (m.rows() != n || m.cols() != d) {
    throw InputError(std::string(what) + ": expected " + std::to_string(n) + "x" +
                     std::to_string(d));
  }
}

void require_square(const Mat& a, const char* what) {
  if (a.rows() != a.cols()) throw InputError(std::string(what) + ": matrix is not square");
  if (!a.allFinite()) throw InputError(std::string(what) + ": matrix has non-finite entries");
}

void require_lyapunov_inputs(const Mat& a, const Mat& q) {
  require_square(a, "lyapunov_solve");
  require_square(q, "lyapunov_solve");
  if (a.rows() != q.rows()) throw InputError("lyapunov_solve: A and Q sizes differ");
  if (!q.isApprox(q.transpose(), 1e-12)) throw InputError("lyapunov_solve: Q is not symmetric");
  if (a.rows() == 0) return;
  Eigen::SelfAdjointEigenSolver<Mat> qs(q, Eigen::EigenvaluesOnly);
  if (qs.eigenvalues().minCoeff() <= 0.0) {
    throw InputError("lyapunov_solve: Q is not positive definite");
  }
  if (spectral_abscissa(a) >= 0.0) {
    throw AssumptionError("lyapunov_solve: A is not Hurwitz");
  }
}

Mat symmetrized(const Mat& p) { return 0.5 * (p + p.transpose()); }

}  // namespace

EstimatorGains EstimatorGains::uniform(int n, double g1, double g2, double g3) {
  EstimatorGains g{Vec::Constant(n, g1), Vec::Constant(n, g2), Vec::Constant(n, g3)};
  g.validate();
  return g;
}

void EstimatorGains::validate() const {
  if (gamma2.size() != gamma1.size() || gamma3.size() != gamma1.size()) {
    throw InputError("EstimatorGains: gain vectors have different lengths");
  }
  for (const Vec* g : {&gamma1, &gamma2, &gamma3}) {
    if (g->size() > 0 && !(g->minCoeff() > 0.0)) {
      throw InputError("EstimatorGains: gains must be strictly positive");
    }
    if (!g->allFinite()) throw InputError("EstimatorGains: non-finite gain");
  }
}

EstimatorState estimator_deriv(const EstimatorState& est, const ControlGraph& ctrl,
                               const LeaderSignal& leader, const EstimatorGains& gains) {
  const int n = est.size();
  const int d = est.dim();
  if (ctrl.size() != n || gains.size() != n) {
    throw InputError("estimator_deriv: estimator, graph and gains disagree on N");
  }
  require_shape(est.v_hat, n, d, "estimator_deriv v_hat");
  require_shape(est.u_hat, n, d, "estimator_deriv u_hat");

  EstimatorState out{est.v_hat, est.u_hat, Mat::Zero(n, d)};
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd dp = Eigen::RowVectorXd::Zero(d);
    Eigen::RowVectorXd dv = Eigen::RowVectorXd::Zero(d);
    Eigen::RowVectorXd du = Eigen::RowVectorXd::Zero(d);
    for (AgentId j : ctrl.neighbors(i + 1)) {
      dp += est.p_hat.row(i) - est.p_hat.row(j - 1);
      dv += est.v_hat.row(i) - est.v_hat.row(j - 1);
      du += est.u_hat.row(i) - est.u_hat.row(j - 1);
    }
    if (ctrl.leader_flag(i + 1)) {
      dp += est.p_hat.row(i) - leader.p.transpose();
      dv += est.v_hat.row(i) - leader.v.transpose();
      du += est.u_hat.row(i) - leader.u.transpose();
    }
    out.u_hat.row(i) = -gains.gamma1[i] * dp - gains.gamma2[i] * dv - gains.gamma3[i] * du;
  }
  return out;
}

EstimationErrors estimation_errors(const EstimatorState& est, const LeaderSignal& leader) {
  const auto minus_leader = [](const Mat& m, const Vec& x) -> Mat {
    return m.rowwise() - x.transpose();
  };
  return {minus_leader(est.p_hat, leader.p), minus_leader(est.v_hat, leader.v),
          minus_leader(est.u_hat, leader.u)};
}

Vec stack_errors(const EstimationErrors& err) {
  const Vec p = flatten(err.p_tilde);
  const Vec v = flatten(err.v_tilde);
  const Vec u = flatten(err.u_tilde);
  Vec q(p.size() + v.size() + u.size());
  q << p, v, u;
  return q;
}

Mat build_A1(const GraphMatrices& m, const EstimatorGains& gains, int d) {
  const int n = static_cast<int>(m.h.rows());
  if (d < 1) throw InputError("build_A1: dimension must be positive");
  if (m.h.cols() != n || gains.size() != n) {
    throw InputError("build_A1: H and gain sizes disagree");
  }
  gains.validate();
  const int block = n * d;
  Mat h_lift = Mat::Zero(block, block);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (m.h(i, j) != 0.0) h_lift.block(i * d, j * d, d, d) = m.h(i, j) * Mat::Identity(d, d);
    }
  }
  const auto lift = [&](const Vec& g) {
    Vec diag(block);
    for (int i = 0; i < n; ++i) diag.segment(i * d, d).setConstant(g[i]);
    return diag;
  };

  Mat a1 = Mat::Zero(3 * block, 3 * block);
  a1.block(0, block, block, block).setIdentity();
  a1.block(block, 2 * block, block, block).setIdentity();
  a1.block(2 * block, 0, block, block) = -(lift(gains.gamma1).asDiagonal() * h_lift);
  a1.block(2 * block, block, block, block) = -(lift(gains.gamma2).asDiagonal() * h_lift);
  a1.block(2 * block, 2 * block, block, block) = -(lift(gains.gamma3).asDiagonal() * h_lift);
  return a1;
}

Vec build_A2(int n, const LeaderSignal& leader) {
  const int d = static_cast<int>(leader.u_dot.size());
  Vec a2 = Vec::Zero(3 * n * d);
  for (int i = 0; i < n; ++i) a2.segment(2 * n * d + i * d, d) = -leader.u_dot;
  return a2;
}

double spectral_abscissa(const Mat& a) {
  require_square(a, "spectral_abscissa");
  if (a.rows() == 0) throw InputError("spectral_abscissa: empty matrix");
  Eigen::EigenSolver<Mat> solver(a, false);
  if (solver.info() != Eigen::Success) {
    throw NumericError("spectral_abscissa: eigenvalue iteration did not converge");
  }
  return solver.eigenvalues().real().maxCoeff();
}

Mat lyapunov_solve_kronecker(const Mat& a, const Mat& q) {
  require_lyapunov_inputs(a, q);
  const Eigen::Index n = a.rows();
  // vec(AᵀP + PA) = (I ⊗ Aᵀ + Aᵀ ⊗ I) vec(P), column-major vec.
  Mat k = Mat::Zero(n * n, n * n);
  const Mat at = a.transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    k.block(j * n, j * n, n, n) += at;
    for (Eigen::Index l = 0; l < n; ++l) {
      if (at(j, l) != 0.0) k.block(j * n, l * n, n, n).diagonal().array() += at(j, l);
    }
  }
  const Vec rhs = -Eigen::Map<const Vec>(q.data(), n * n);
  Eigen::PartialPivLU<Mat> lu(k);
  const Vec x = lu.solve(rhs);
  if (!x.allFinite()) throw NumericError("lyapunov_solve: singular Kronecker system");
  return symmetrized(Eigen::Map<const Mat>(x.data(), n, n));
}

Mat lyapunov_solve_schur(const Mat& a, const Mat& q) {
  require_lyapunov_inputs(a, q);
  using CMat = Eigen::MatrixXcd;
  using CVec = Eigen::VectorXcd;
  const Eigen::Index n = a.rows();
  // A = U T Uᴴ with T upper triangular, so Aᵀ = U Tᴴ Uᴴ for real A and the
  // equation becomes Tᴴ Y + Y T = -Uᴴ Q U with P = U Y Uᴴ.
  Eigen::ComplexSchur<Mat> schur(a);
  if (schur.info() != Eigen::Success) throw NumericError("lyapunov_solve: Schur form failed");
  const CMat& u = schur.matrixU();
  const CMat& t = schur.matrixT();
  const CMat c = -(u.adjoint() * q.cast<std::complex<double>>() * u);
  const CMat th = t.adjoint();

  CMat y = CMat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    CVec rhs = c.col(j);
    for (Eigen::Index k = 0; k < j; ++k) rhs -= t(k, j) * y.col(k);
    CMat lower = th;
    lower.diagonal().array() += t(j, j);
    y.col(j) = lower.triangularView<Eigen::Lower>().solve(rhs);
  }
  const Mat p = (u * y * u.adjoint()).real();
  if (!p.allFinite()) throw NumericError("lyapunov_solve: singular Sylvester back substitution");
  return symmetrized(p);
}

Mat lyapunov_solve(const Mat& a, const Mat& q) {
  if (a.rows() <= kKroneckerLyapunovLimit) return lyapunov_solve_kronecker(a, q);
  return lyapunov_solve_schur(a, q);
}

double lyapunov_residual(const Mat& a, const Mat& p, const Mat& q) {
  return (a.transpose() * p + p * a + q).norm();
}

}  // namespace formation
