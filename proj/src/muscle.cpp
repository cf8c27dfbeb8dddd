#include "logbal/muscle.hpp"

#include <algorithm>
#include <cmath>

#include "logbal/errors.hpp"

namespace logbal {

namespace {

constexpr double kStep = 1e-6;

// Indices of the two acceleration rows on which a pair acts most strongly.
std::array<Eigen::Index, 2> dominant_rows(const LinearPlant& plant, int column) {
  std::array<Eigen::Index, 2> rows{3, 4};
  Eigen::Vector3d mag = plant.B.block(3, column, 3, 1).cwiseAbs();
  Eigen::Index first = 0;
  mag.maxCoeff(&first);
  mag[first] = -1.0;
  Eigen::Index second = 0;
  mag.maxCoeff(&second);
  rows[0] = 3 + std::min(first, second);
  rows[1] = 3 + std::max(first, second);
  return rows;
}

}  // namespace

void MuscleParams::validate() const {
  if (!(f_max > 0.0 && arm_hip > 0.0 && arm_ankle > 0.0 && q_state > 0.0 &&
        r_input > 0.0)) {
    throw InvalidArgument("muscle parameters must be positive");
  }
}

Eigen::Matrix<double, 2, 4> MuscleParams::torque_map() const {
  const double hip = f_max * arm_hip;
  const double ankle = f_max * arm_ankle;
  Eigen::Matrix<double, 2, 4> t;
  t << 0.0, 0.0, ankle, -ankle,
       hip, -hip, 0.0, 0.0;
  return t;
}

ControlTorques activation_torques(const MuscleParams& mp, const Activation& a) {
  const Eigen::Vector2d tau = mp.torque_map() * a;
  return {tau[0], tau[1]};
}

TorquePlant linearize_torque_plant(const BodyParams& p, const EquilibriumPosture& eq) {
  const State x0 = eq.state();
  const ControlTorques u0 = static_torques(p, x0);
  TorquePlant out;
  for (int i = 0; i < 6; ++i) {
    Vector6 e = Vector6::Zero();
    e[i] = kStep;
    const Vector6 plus = state_derivative(p, State::from_vector(x0.to_vector() + e), u0);
    const Vector6 minus = state_derivative(p, State::from_vector(x0.to_vector() - e), u0);
    out.A.col(i) = (plus - minus) / (2.0 * kStep);
  }
  for (int j = 0; j < 2; ++j) {
    ControlTorques up = u0, um = u0;
    (j == 0 ? up.tau1 : up.tau2) += kStep;
    (j == 0 ? um.tau1 : um.tau2) -= kStep;
    out.B.col(j) = (state_derivative(p, x0, up) - state_derivative(p, x0, um)) / (2.0 * kStep);
  }
  return out;
}

Eigen::Matrix<double, 2, 6> linearize_com_output(const BodyParams& p,
                                                 const EquilibriumPosture& eq) {
  const Vector6 x0 = eq.state().to_vector();
  Eigen::Matrix<double, 2, 6> c = Eigen::Matrix<double, 2, 6>::Zero();
  for (int i = 0; i < 3; ++i) {
    Vector6 e = Vector6::Zero();
    e[i] = kStep;
    c(0, i) = (positions(p, State::from_vector(x0 + e)).com_x -
               positions(p, State::from_vector(x0 - e)).com_x) / (2.0 * kStep);
    // The COM velocity is linear in the rates.
    Vector6 v = x0;
    v[3 + i] = 1.0;
    c(1, 3 + i) = com_velocity(p, State::from_vector(v)).x();
  }
  return c;
}

LinearPlant muscle_plant(const BodyParams& p, const MuscleParams& mp, const EquilibriumPosture& eq) {
  mp.validate();
  const TorquePlant tp = linearize_torque_plant(p, eq);
  LinearPlant plant;
  plant.A = tp.A;
  plant.B = tp.B * mp.torque_map();
  plant.Q = mp.q_state * Eigen::MatrixXd::Identity(6, 6);
  plant.R = mp.r_input * Eigen::MatrixXd::Identity(4, 4);
  plant.label = PlantLabel::MuscleFull;
  plant.input_note = "u = activations (hip pair 1,2; ankle pair 3,4), deviation from upright";
  return plant;
}

Eigen::Vector2d shift_to_antagonist(const Eigen::Vector2d& u_lqr, const Eigen::Vector2d& q,
                                    const std::array<double, 4>& b) {
  const double w1 = q[0] / (q[0] + q[1]);
  const double w2 = q[1] / (q[0] + q[1]);
  Eigen::Vector2d u = u_lqr;
  if (u_lqr[0] < 0.0 && u_lqr[1] < 0.0) {
    u[0] = (w1 * b[1] / b[0] + w2 * b[3] / b[2]) * u_lqr[1];
    u[1] = (w1 * b[0] / b[1] + w2 * b[2] / b[3]) * u_lqr[0];
  } else if (u_lqr[0] < 0.0) {
    u[0] = 0.0;
    u[1] = u_lqr[1] + (w1 * b[0] / b[1] + w2 * b[2] / b[3]) * u_lqr[0];
  } else if (u_lqr[1] < 0.0) {
    u[1] = 0.0;
    u[0] = u_lqr[0] + (w1 * b[1] / b[0] + w2 * b[3] / b[2]) * u_lqr[1];
  }
  return u;
}

Eigen::Vector2d compensate(const Eigen::Vector2d& u_lqr, const Eigen::Vector2d& q,
                           const std::array<double, 4>& b) {
  return shift_to_antagonist(u_lqr, q, b).cwiseMax(0.0).cwiseMin(1.0);
}

Activation muscle_controller_step(const LqrGain& gain, const LinearPlant& plant,
                                  const MuscleParams& mp, const Vector6& x,
                                  const ControlTorques& hold) {
  Activation u = -gain.K * x;
  const double hip = mp.f_max * mp.arm_hip;
  const double ankle = mp.f_max * mp.arm_ankle;
  u[0] += hold.tau2 / (2.0 * hip);
  u[1] -= hold.tau2 / (2.0 * hip);
  u[2] += hold.tau1 / (2.0 * ankle);
  u[3] -= hold.tau1 / (2.0 * ankle);

  Activation a;
  for (int pair = 0; pair < 2; ++pair) {
    const int c = 2 * pair;
    const auto rows = dominant_rows(plant, c);
    const Eigen::Vector2d q(plant.Q(rows[0], rows[0]), plant.Q(rows[1], rows[1]));
    const std::array<double, 4> b{plant.B(rows[0], c), plant.B(rows[0], c + 1),
                                  plant.B(rows[1], c), plant.B(rows[1], c + 1)};
    a.segment<2>(c) = compensate(u.segment<2>(c), q, b);
  }
  return a;
}

}  // namespace logbal
