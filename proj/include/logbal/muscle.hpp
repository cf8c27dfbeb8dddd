#pragma once

#include <array>

#include <Eigen/Dense>

#include "logbal/dynamics.hpp"
#include "logbal/lqr.hpp"
#include "logbal/model.hpp"

namespace logbal {

/// Two agonist-antagonist pairs: muscles 1 and 2 act on the hip, muscles 3
/// and 4 on the ankle. The first muscle of a pair pushes the joint torque
/// positive, the second negative.
struct MuscleParams {
  double f_max = 800.0;
  double arm_hip = 0.10;
  double arm_ankle = 0.12;
  /// LQR weights of the full-state plant (Q = q_state I, R = r_input I).
  double q_state = 0.01;
  double r_input = 1.0;

  void validate() const;
  /// Torques (tau1, tau2) per unit activation of each muscle.
  Eigen::Matrix<double, 2, 4> torque_map() const;
};

using Activation = Eigen::Vector4d;

ControlTorques activation_torques(const MuscleParams& mp, const Activation& a);

/// Linearization about the upright posture with the holding torques applied.
///
/// A comes from central differences (h = 1e-6) of the nonlinear dynamics in
/// the 6-state (theta, alpha, beta, rates); B maps activations to
/// accelerations through the differenced torque channel.
LinearPlant muscle_plant(const BodyParams& p, const MuscleParams& mp, const EquilibriumPosture& eq);

/// Same linearization with the two joint torques as inputs.
struct TorquePlant {
  Eigen::Matrix<double, 6, 6> A;
  Eigen::Matrix<double, 6, 2> B;
};
TorquePlant linearize_torque_plant(const BodyParams& p, const EquilibriumPosture& eq);

/// Rows mapping the 6-state deviation to (COM_x, COM_x rate) deviations.
Eigen::Matrix<double, 2, 6> linearize_com_output(const BodyParams& p, const EquilibriumPosture& eq);

/// Shifts a negative activation of one pair member onto its antagonist.
///
/// `q` holds the two diagonal state penalties and `b` the 2x2 input block
/// (b1 b2; b3 b4) of the rows being weighed, so that b1*b2 < 0 and b3*b4 < 0.
/// The shifted amount reproduces the same weighted acceleration, so the
/// result is nonnegative whenever the pair signs hold.
Eigen::Vector2d shift_to_antagonist(const Eigen::Vector2d& u_lqr, const Eigen::Vector2d& q,
                                    const std::array<double, 4>& b);

/// shift_to_antagonist clipped to [0, 1].
Eigen::Vector2d compensate(const Eigen::Vector2d& u_lqr, const Eigen::Vector2d& q,
                           const std::array<double, 4>& b);

/// u = -K x plus the activations that hold `hold` torques, compensated per
/// pair and clipped to [0, 1]. `x` is the deviation from the upright state.
Activation muscle_controller_step(const LqrGain& gain, const LinearPlant& plant,
                                  const MuscleParams& mp, const Vector6& x,
                                  const ControlTorques& hold = {});

}  // namespace logbal
