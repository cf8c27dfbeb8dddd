#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "logbal/model.hpp"

namespace logbal {

enum class PlantLabel { Case1, Case2Hip, Case3Hip, Case3Ankle, MuscleFull };

std::string to_string(PlantLabel label);

struct LinearPlant {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  PlantLabel label = PlantLabel::Case1;
  /// Units and sign convention of the input channel.
  std::string input_note;
};

struct LqrGain {
  Eigen::MatrixXd K;
  Eigen::MatrixXd P;
};

struct CaseConstants {
  double C1 = 0.0;  ///< COM acceleration per unit hip torque
  double C3 = 0.0;  ///< torso acceleration per unit hip torque
  double C4 = 0.0;  ///< COM acceleration per unit torso acceleration
  double L = 0.0;   ///< pendulum length
};

/// State-to-input penalty ratios (R = 1) of the three cases.
struct PenaltyConfig {
  double case1 = 100.0;
  double case2 = 1e8;
  double case3 = 15.0;
  /// Case 2 rate weight relative to the COM weight: Q = case2 diag(1, w).
  double case2_rate = 1e-1;
};

/// Stabilizing solution of A'P + PA - PBR^-1B'P + Q = 0 by Newton-Kleinman.
///
/// A zero Q yields P = 0, K = 0. Throws InvalidArgument on bad shapes or a
/// non-positive-definite R, NotStabilizable when an eigenvalue of A in the
/// closed right half-plane is uncontrollable, NoConvergence after 200
/// iterations.
LqrGain solve_care(const LinearPlant& plant);

/// ||A'P + PA - PBR^-1B'P + Q||_F / max(1, ||P||_F).
double riccati_residual(const LinearPlant& plant, const Eigen::MatrixXd& P);

Eigen::VectorXcd closed_loop_eigenvalues(const LinearPlant& plant, const Eigen::MatrixXd& K);

/// All closed-loop eigenvalues have negative real part.
bool closed_loop_stable(const LinearPlant& plant, const Eigen::MatrixXd& K);

/// Rank of (A - lambda I, B) is full for every eigenvalue with Re >= 0.
bool stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Solves Ac' X + X Ac = -S for symmetric S via the Kronecker form.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& Ac, const Eigen::MatrixXd& S);

CaseConstants case_constants(const BodyParams& p);

/// Case1, Case2Hip, Case3Hip, Case3Ankle, in that order.
///
/// The contact-point plants take u = x_contact / r as input, so the foot
/// target is asin(-u) for Case1 and asin(u) for Case3Ankle.
std::vector<LinearPlant> build_case_plants(const BodyParams& p, const PenaltyConfig& weights);

}  // namespace logbal
