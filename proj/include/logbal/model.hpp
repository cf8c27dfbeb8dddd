#pragma once

#include <array>
#include <optional>

#include <Eigen/Dense>

namespace logbal {

using Vector6 = Eigen::Matrix<double, 6, 1>;

/// Three point masses (ankle, hip, head) standing on a fixed log.
///
/// Mass 0 sits at the ankle, l0 behind the contact point along the foot.
/// Mass 1 sits at the hip, l1 above the ankle along the leg; mass 2 sits at
/// the head, l2 above the hip along the torso.
struct BodyParams {
  double m0 = 7.0;
  double m1 = 42.0;
  double m2 = 21.0;
  double l0 = 0.07;
  double l1 = 0.9;
  double l2 = 0.7;
  double r = 0.10;  ///< log radius
  double g = 9.81;

  double total_mass() const { return m0 + m1 + m2; }

  /// Throws InvalidArgument unless every mass/length/radius/g is finite and > 0.
  void validate() const;
};

/// Generalised coordinates and rates.
///
/// theta is the foot angle from the x axis, alpha and beta are the leg and
/// torso angles from the y axis. All angles are global and counter-clockwise.
struct State {
  double theta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double dtheta = 0.0;
  double dalpha = 0.0;
  double dbeta = 0.0;

  Eigen::Vector3d q() const { return {theta, alpha, beta}; }
  Eigen::Vector3d qdot() const { return {dtheta, dalpha, dbeta}; }
  Vector6 to_vector() const;
  static State from_vector(const Vector6& v);
  bool finite() const;

  friend bool operator==(const State&, const State&) = default;
};

struct MassPointPositions {
  double x0 = 0.0, y0 = 0.0;
  double x1 = 0.0, y1 = 0.0;
  double x2 = 0.0, y2 = 0.0;
  double com_x = 0.0, com_y = 0.0;
};

struct JointAngles {
  double hip = 0.0;
  double ankle = 0.0;
};

struct EquilibriumPosture {
  double beta0 = 0.0;
  double com_y_eq = 0.0;
  /// COM height above the contact point; rod length of the pendulum plants.
  double pendulum_length = 0.0;

  /// The upright rest state (theta = alpha = 0, beta = beta0).
  State state() const { return State{0.0, 0.0, beta0, 0.0, 0.0, 0.0}; }
};

/// Point-mass positions together with their acceleration maps.
///
/// The acceleration of point i is jacobian[i] * qddot + bias[i]; the bias
/// collects the velocity-product terms.
struct PointKinematics {
  Eigen::Vector2d contact;
  std::array<Eigen::Vector2d, 3> point;
  std::array<Eigen::Matrix<double, 2, 3>, 3> jacobian;
  std::array<Eigen::Vector2d, 3> bias;
  /// Signed foot lever r*theta - l0 from the contact point to the ankle.
  double lever = 0.0;
};

PointKinematics point_kinematics(const BodyParams& p, const State& s);

/// Point of the log touched by the foot: (-r sin(theta), r cos(theta)).
Eigen::Vector2d contact_point(const BodyParams& p, double theta);

MassPointPositions positions(const BodyParams& p, const State& s);

/// Horizontal and vertical COM velocity.
Eigen::Vector2d com_velocity(const BodyParams& p, const State& s);

/// hip = pi - alpha + beta, ankle = pi/2 + alpha - theta.
JointAngles joint_angles(const State& s);

/// Solves COM_x(0, 0, beta0) = 0 by bisection.
EquilibriumPosture equilibrium_posture(const BodyParams& p);

/// Torso lean beta in (-pi/2, pi/2) such that COM_x(theta, alpha, beta) equals
/// `target`, found by bisection; nullopt when the target is out of reach.
std::optional<double> solve_torso_lean(const BodyParams& p, double theta, double alpha,
                                       double target);

}  // namespace logbal

