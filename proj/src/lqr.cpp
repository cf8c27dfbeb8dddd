#include "logbal/lqr.hpp"

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "logbal/errors.hpp"

namespace logbal {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kTolerance = 1e-10;

void check_shapes(const LinearPlant& pl) {
  const auto n = pl.A.rows();
  const auto m = pl.B.cols();
  if (n == 0 || pl.A.cols() != n || pl.B.rows() != n || m == 0 || pl.Q.rows() != n ||
      pl.Q.cols() != n || pl.R.rows() != m || pl.R.cols() != m) {
    throw InvalidArgument("solve_care: inconsistent plant dimensions");
  }
  if (!pl.A.allFinite() || !pl.B.allFinite() || !pl.Q.allFinite() || !pl.R.allFinite()) {
    throw InvalidArgument("solve_care: non-finite plant matrix");
  }
  if ((pl.Q - pl.Q.transpose()).norm() > 1e-12 * std::max(1.0, pl.Q.norm())) {
    throw InvalidArgument("solve_care: Q is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (pl.R + pl.R.transpose()));
  if (llt.info() != Eigen::Success) throw InvalidArgument("solve_care: R is not positive definite");
}

double spectral_abscissa(const Eigen::MatrixXd& A) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues().real().maxCoeff();
}

// Ackermann placement of all poles at -w for a single-input plant of order <= 2.
Eigen::MatrixXd ackermann_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const auto n = A.rows();
  const double w = 1.0 + Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues().cwiseAbs().maxCoeff();
  Eigen::MatrixXd ctrb(n, n);
  ctrb.col(0) = B.col(0);
  if (n == 2) ctrb.col(1) = A * B.col(0);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  // (s + w)^n evaluated at A.
  const Eigen::MatrixXd phi = n == 1 ? Eigen::MatrixXd(A + w * I) : Eigen::MatrixXd(A * A + 2.0 * w * A + w * w * I);
  Eigen::RowVectorXd last = Eigen::RowVectorXd::Zero(n);
  last[n - 1] = 1.0;
  return last * ctrb.inverse() * phi;
}

// Bass: shift A by beta past its spectrum, solve a Lyapunov equation for the
// shifted controllability Gramian Z, and take K = B' Z^-1.
Eigen::MatrixXd bass_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double beta) {
  const auto n = A.rows();
  const Eigen::MatrixXd shifted = -(A + beta * Eigen::MatrixXd::Identity(n, n)).transpose();
  // shifted' Z + Z shifted = -2 B B'  <=>  (A + beta I) Z + Z (A + beta I)' = 2 B B'
  const Eigen::MatrixXd Z = solve_lyapunov(shifted, 2.0 * B * B.transpose());
  return B.transpose() * Z.inverse();
}

Eigen::MatrixXd initial_gain(const LinearPlant& pl) {
  if (spectral_abscissa(pl.A) < 0.0) return Eigen::MatrixXd::Zero(pl.B.cols(), pl.A.rows());
  Eigen::MatrixXd K;
  if (pl.A.rows() <= 2 && pl.B.cols() == 1) {
    Eigen::MatrixXd ctrb(pl.A.rows(), pl.A.rows());
    ctrb.col(0) = pl.B.col(0);
    if (pl.A.rows() == 2) ctrb.col(1) = pl.A * pl.B.col(0);
    if (Eigen::FullPivLU<Eigen::MatrixXd>(ctrb).rank() == pl.A.rows()) K = ackermann_gain(pl.A, pl.B);
  }
  // A small shift keeps the Gramian well conditioned; the large one is the
  // textbook bound.
  for (const double beta : {1.0 + std::max(0.0, spectral_abscissa(pl.A)), 1.0 + pl.A.norm()}) {
    if (K.size() != 0 && K.allFinite() && spectral_abscissa(pl.A - pl.B * K) < 0.0) break;
    K = bass_gain(pl.A, pl.B, beta);
  }
  if (!K.allFinite() || spectral_abscissa(pl.A - pl.B * K) >= 0.0) {
    throw NotStabilizable("solve_care: could not find an initial stabilizing gain for " +
                          to_string(pl.label));
  }
  return K;
}

}  // namespace

std::string to_string(PlantLabel label) {
  switch (label) {
    case PlantLabel::Case1: return "Case1";
    case PlantLabel::Case2Hip: return "Case2Hip";
    case PlantLabel::Case3Hip: return "Case3Hip";
    case PlantLabel::Case3Ankle: return "Case3Ankle";
    case PlantLabel::MuscleFull: return "MuscleFull";
  }
  return "?";
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& Ac, const Eigen::MatrixXd& S) {
  const auto n = Ac.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd kron(n * n, n * n);
  // Column-major vec: vec(Ac' X) = (I kron Ac') vec X, vec(X Ac) = (Ac' kron I) vec X.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      kron.block(i * n, j * n, n, n) = I(i, j) * Ac.transpose() + Ac(j, i) * I;
    }
  }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(S.data(), n * n);
  const Eigen::VectorXd x = kron.fullPivLu().solve(rhs);
  Eigen::MatrixXd X = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
  return 0.5 * (X + X.transpose());
}

bool stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const auto n = A.rows();
  const Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues();
  const double scale = std::max({1.0, A.norm(), B.norm()});
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    if (eig[k].real() < 0.0) continue;
    Eigen::MatrixXcd pbh(n, n + B.cols());
    pbh.leftCols(n) = A.cast<std::complex<double>>() -
                      eig[k] * Eigen::MatrixXcd::Identity(n, n);
    pbh.rightCols(B.cols()) = B.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    if (svd.singularValues().minCoeff() < 1e-10 * scale) return false;
  }
  return true;
}

double riccati_residual(const LinearPlant& pl, const Eigen::MatrixXd& P) {
  const Eigen::MatrixXd Rinv = pl.R.inverse();
  const Eigen::MatrixXd res = pl.A.transpose() * P + P * pl.A -
                              P * pl.B * Rinv * pl.B.transpose() * P + pl.Q;
  return res.norm() / std::max(1.0, P.norm());
}

Eigen::VectorXcd closed_loop_eigenvalues(const LinearPlant& pl, const Eigen::MatrixXd& K) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(pl.A - pl.B * K, false).eigenvalues();
}

bool closed_loop_stable(const LinearPlant& pl, const Eigen::MatrixXd& K) {
  return closed_loop_eigenvalues(pl, K).real().maxCoeff() < 0.0;
}

LqrGain solve_care(const LinearPlant& pl) {
  check_shapes(pl);
  const auto n = pl.A.rows();
  const auto m = pl.B.cols();
  if (pl.Q.isZero(0.0)) {
    return {Eigen::MatrixXd::Zero(m, n), Eigen::MatrixXd::Zero(n, n)};
  }
  if (!stabilizable(pl.A, pl.B)) {
    throw NotStabilizable("solve_care: " + to_string(pl.label) + " is not stabilizable");
  }
  const Eigen::MatrixXd Rinv = pl.R.inverse();
  Eigen::MatrixXd K = initial_gain(pl);
  Eigen::MatrixXd P;
  double best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kMaxIterations; ++it) {
    const Eigen::MatrixXd Ac = pl.A - pl.B * K;
    P = solve_lyapunov(Ac, pl.Q + K.transpose() * pl.R * K);
    K = Rinv * pl.B.transpose() * P;
    const double res = riccati_residual(pl, P);
    if (!std::isfinite(res)) break;
    if (res < kTolerance) return {K, P};
    best = std::min(best, res);
  }
  throw NoConvergence("solve_care: " + to_string(pl.label) + " stalled at residual " +
                      std::to_string(best));
}

CaseConstants case_constants(const BodyParams& p) {
  p.validate();
  const double mix = p.l1 * p.m1 + p.l1 * p.m2 + p.l2 * p.m2;
  CaseConstants c;
  c.C3 = mix / (p.l1 * p.l2 * p.l2 * p.m1 * p.m2);
  c.C4 = p.l2 * p.l2 * p.m1 * p.m2 / (mix * p.total_mass());
  c.C1 = c.C3 * c.C4;
  c.L = equilibrium_posture(p).pendulum_length;
  return c;
}

std::vector<LinearPlant> build_case_plants(const BodyParams& p, const PenaltyConfig& w) {
  const CaseConstants c = case_constants(p);
  const double gl = p.g / c.L;
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d pendulum;
  pendulum << 0.0, 1.0, gl, 0.0;
  Eigen::Matrix2d integrator;
  integrator << 0.0, 1.0, 0.0, 0.0;
  const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(1, 1);

  std::vector<LinearPlant> out;
  out.push_back({pendulum, Eigen::Vector2d(0.0, -gl * p.r), w.case1 * I, R, PlantLabel::Case1,
                 "u = x_contact/r, COMdd = g/L (COM_x - r u), target = asin(-u)"});
  const Eigen::Matrix2d q2 = w.case2 * Eigen::Vector2d(1.0, w.case2_rate).asDiagonal();
  out.push_back({integrator, Eigen::Vector2d(0.0, c.C1), q2, R, PlantLabel::Case2Hip,
                 "u = tau2 [N m], COMdd = C1 tau2"});
  out.push_back({integrator, Eigen::Vector2d(0.0, c.C3), w.case3 * I, R, PlantLabel::Case3Hip,
                 "u = tau2 [N m], states (beta - beta0, beta rate), betadd = C3 tau2"});
  out.push_back({pendulum, Eigen::Vector2d(0.0, gl * p.r), w.case3 * I, R, PlantLabel::Case3Ankle,
                 "u = x_contact/r, COMdd = g/L (COM_x + r u) + C4 betadd, target = asin(u)"});
  return out;
}

}  // namespace logbal
