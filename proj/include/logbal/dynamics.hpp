#pragma once

#include <Eigen/Dense>

#include "logbal/model.hpp"

namespace logbal {

struct GeneralizedAccel {
  double ddtheta = 0.0;
  double ddalpha = 0.0;
  double ddbeta = 0.0;

  Eigen::Vector3d vec() const { return {ddtheta, ddalpha, ddbeta}; }
  static GeneralizedAccel from_vec(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

/// tau1 acts at the ankle (foot on leg), tau2 at the hip (leg on torso).
struct ControlTorques {
  double tau1 = 0.0;
  double tau2 = 0.0;
};

struct TorqueLimits {
  double tau1_max = 200.0;
  double tau2_max = 300.0;

  ControlTorques saturate(const ControlTorques& u) const;
};

struct ContactForces {
  double Nx = 0.0;
  double Ny = 0.0;
  double fx = 0.0;
  double fy = 0.0;
};

/// M * qddot = b, assembled from the three moment balances.
///
/// Row 0: moments of all masses about the contact point (zero).
/// Row 1: moments of leg and torso about the ankle (tau1).
/// Row 2: moment of the torso about the hip (tau2).
struct MomentSystem {
  Eigen::Matrix3d M;
  Eigen::Vector3d b;
};

MomentSystem moment_system(const BodyParams& p, const State& s, const ControlTorques& u);

/// Throws NonFinite on non-finite state or torque, SingularMass when the
/// moment system is singular relative to its row scale.
GeneralizedAccel forward_dynamics(const BodyParams& p, const State& s, const ControlTorques& u);

/// Residuals of the three moment equations evaluated from the point
/// accelerations, each divided by the sum of magnitudes of its terms.
Eigen::Vector3d moment_residuals(const BodyParams& p, const State& s, const GeneralizedAccel& a,
                                 const ControlTorques& u);

/// Kinetic energy of the three point masses plus gravitational potential.
double total_energy(const BodyParams& p, const State& s);

/// Rate of work done by the joint torques.
double joint_power(const State& s, const ControlTorques& u);

/// Torques that hold the posture q with all rates and accelerations zero.
ControlTorques static_torques(const BodyParams& p, const State& s);

/// Full 6-state derivative (rates, accelerations).
Vector6 state_derivative(const BodyParams& p, const State& s, const ControlTorques& u);

/// Normal forces from the ankle-torque relations, tangential forces from
/// horizontal and vertical force balance. Throws DegenerateLever when
/// |r*theta - l0| < 1e-9.
ContactForces contact_forces(const BodyParams& p, const State& s, const GeneralizedAccel& a,
                             const ControlTorques& u);

/// fy - fx*tan(theta), the tangency check on the friction components.
double tangency_residual(const ContactForces& cf, double theta);

/// |f| <= mu*|N|; diagnostic only, never enforced.
bool within_friction_cone(const ContactForces& cf, double mu = 1.0);

}  // namespace logbal
