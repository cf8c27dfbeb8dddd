#include "logbal/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "logbal/errors.hpp"

namespace logbal {

namespace {

double cross(const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
  return u.x() * v.y() - u.y() * v.x();
}

// cross(r, J*qdd) as a row in qdd.
Eigen::RowVector3d cross_row(const Eigen::Vector2d& r, const Eigen::Matrix<double, 2, 3>& j) {
  return r.x() * j.row(1) - r.y() * j.row(0);
}

std::array<double, 3> masses(const BodyParams& p) { return {p.m0, p.m1, p.m2}; }

}  // namespace

ControlTorques TorqueLimits::saturate(const ControlTorques& u) const {
  return {std::clamp(u.tau1, -tau1_max, tau1_max), std::clamp(u.tau2, -tau2_max, tau2_max)};
}

MomentSystem moment_system(const BodyParams& p, const State& s, const ControlTorques& u) {
  const PointKinematics k = point_kinematics(p, s);
  const auto m = masses(p);
  const Eigen::Vector2d gravity(0.0, p.g);

  MomentSystem sys;
  sys.M.setZero();
  sys.b.setZero();
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d rel = k.point[i] - k.contact;
    sys.M.row(0) += m[i] * cross_row(rel, k.jacobian[i]);
    sys.b[0] -= m[i] * cross(rel, k.bias[i] + gravity);
  }
  for (int i = 1; i < 3; ++i) {
    const Eigen::Vector2d rel = k.point[i] - k.point[0];
    sys.M.row(1) += m[i] * cross_row(rel, k.jacobian[i]);
    sys.b[1] -= m[i] * cross(rel, k.bias[i] + gravity);
  }
  sys.b[1] += u.tau1;
  const Eigen::Vector2d rel = k.point[2] - k.point[1];
  sys.M.row(2) = m[2] * cross_row(rel, k.jacobian[2]);
  sys.b[2] = u.tau2 - m[2] * cross(rel, k.bias[2] + gravity);
  return sys;
}

GeneralizedAccel forward_dynamics(const BodyParams& p, const State& s, const ControlTorques& u) {
  if (!s.finite() || !std::isfinite(u.tau1) || !std::isfinite(u.tau2)) {
    throw NonFinite("forward_dynamics: non-finite state or torque");
  }
  const MomentSystem sys = moment_system(p, s, u);
  const double scale = sys.M.row(0).norm() * sys.M.row(1).norm() * sys.M.row(2).norm();
  const double det = sys.M.determinant();
  if (!(std::abs(det) >= 1e-12 * scale) || scale == 0.0) {
    throw SingularMass("forward_dynamics: singular moment system at theta=" +
                       std::to_string(s.theta));
  }
  const Eigen::Vector3d qdd = sys.M.partialPivLu().solve(sys.b);
  if (!qdd.allFinite()) throw NonFinite("forward_dynamics: non-finite acceleration");
  return GeneralizedAccel::from_vec(qdd);
}

Eigen::Vector3d moment_residuals(const BodyParams& p, const State& s, const GeneralizedAccel& a,
                                 const ControlTorques& u) {
  const PointKinematics k = point_kinematics(p, s);
  const auto m = masses(p);
  const Eigen::Vector3d qdd = a.vec();
  const Eigen::Vector2d gravity(0.0, p.g);
  std::array<Eigen::Vector2d, 3> force;
  for (int i = 0; i < 3; ++i) force[i] = m[i] * (k.jacobian[i] * qdd + k.bias[i] + gravity);

  Eigen::Vector3d res;
  double sum = 0.0, mag = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double t = cross(k.point[i] - k.contact, force[i]);
    sum += t;
    mag += std::abs(t);
  }
  res[0] = sum / std::max(mag, 1.0);

  sum = -u.tau1;
  mag = std::abs(u.tau1);
  for (int i = 1; i < 3; ++i) {
    const double t = cross(k.point[i] - k.point[0], force[i]);
    sum += t;
    mag += std::abs(t);
  }
  res[1] = sum / std::max(mag, 1.0);

  const double t = cross(k.point[2] - k.point[1], force[2]);
  res[2] = (t - u.tau2) / std::max(std::abs(t) + std::abs(u.tau2), 1.0);
  return res;
}

double total_energy(const BodyParams& p, const State& s) {
  const PointKinematics k = point_kinematics(p, s);
  const auto m = masses(p);
  const Eigen::Vector3d qd = s.qdot();
  double e = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d v = k.jacobian[i] * qd;
    e += 0.5 * m[i] * v.squaredNorm() + m[i] * p.g * k.point[i].y();
  }
  return e;
}

double joint_power(const State& s, const ControlTorques& u) {
  return u.tau1 * (s.dalpha - s.dtheta) + u.tau2 * (s.dbeta - s.dalpha);
}

ControlTorques static_torques(const BodyParams& p, const State& s) {
  const double sa = std::sin(s.alpha), sb = std::sin(s.beta);
  return {-p.g * (p.m2 * (p.l2 * sb + p.l1 * sa) + p.m1 * p.l1 * sa), -p.g * p.m2 * p.l2 * sb};
}

Vector6 state_derivative(const BodyParams& p, const State& s, const ControlTorques& u) {
  const GeneralizedAccel a = forward_dynamics(p, s, u);
  Vector6 d;
  d << s.dtheta, s.dalpha, s.dbeta, a.ddtheta, a.ddalpha, a.ddbeta;
  return d;
}

ContactForces contact_forces(const BodyParams& p, const State& s, const GeneralizedAccel& a,
                             const ControlTorques& u) {
  const double lever = p.r * s.theta - p.l0;
  if (std::abs(lever) < 1e-9) throw DegenerateLever("contact_forces: foot lever vanished");
  const PointKinematics k = point_kinematics(p, s);
  const auto m = masses(p);
  const Eigen::Vector3d qdd = a.vec();
  Eigen::Vector2d net = Eigen::Vector2d::Zero();
  for (int i = 0; i < 3; ++i) net += m[i] * (k.jacobian[i] * qdd + k.bias[i]);

  ContactForces cf;
  cf.Nx = u.tau1 / lever * std::sin(s.theta);
  cf.Ny = u.tau1 / -lever * std::cos(s.theta);
  cf.fx = net.x() - cf.Nx;
  cf.fy = net.y() + p.total_mass() * p.g - cf.Ny;
  return cf;
}

double tangency_residual(const ContactForces& cf, double theta) {
  return cf.fy - cf.fx * std::tan(theta);
}

bool within_friction_cone(const ContactForces& cf, double mu) {
  return std::hypot(cf.fx, cf.fy) <= mu * std::hypot(cf.Nx, cf.Ny);
}

}  // namespace logbal
