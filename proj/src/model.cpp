#include "logbal/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "logbal/errors.hpp"

namespace logbal {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void BodyParams::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"m0", m0}, {"m1", m1}, {"m2", m2}, {"l0", l0}, {"l1", l1},
      {"l2", l2}, {"r", r},   {"g", g}};
  for (const auto& [name, value] : fields) {
    if (!positive_finite(value)) {
      throw InvalidArgument(std::string("body parameter ") + name +
                            " must be finite and > 0, got " + std::to_string(value));
    }
  }
}

Vector6 State::to_vector() const {
  Vector6 v;
  v << theta, alpha, beta, dtheta, dalpha, dbeta;
  return v;
}

State State::from_vector(const Vector6& v) { return State{v[0], v[1], v[2], v[3], v[4], v[5]}; }

bool State::finite() const { return to_vector().allFinite(); }

Eigen::Vector2d contact_point(const BodyParams& p, double theta) {
  return {-p.r * std::sin(theta), p.r * std::cos(theta)};
}

PointKinematics point_kinematics(const BodyParams& p, const State& s) {
  const double st = std::sin(s.theta), ct = std::cos(s.theta);
  const Eigen::Vector2d normal(-st, ct);  // radial direction at the contact
  const Eigen::Vector2d foot(ct, st);     // along the foot
  const Eigen::Vector2d leg(-std::sin(s.alpha), std::cos(s.alpha));
  const Eigen::Vector2d leg_perp(std::cos(s.alpha), std::sin(s.alpha));
  const Eigen::Vector2d torso(-std::sin(s.beta), std::cos(s.beta));
  const Eigen::Vector2d torso_perp(std::cos(s.beta), std::sin(s.beta));

  PointKinematics k;
  k.lever = p.r * s.theta - p.l0;
  k.contact = p.r * normal;
  // The foot rolls without slipping, so the ankle sits `lever` along the foot
  // from the current contact point.
  k.point[0] = k.contact + k.lever * foot;
  k.point[1] = k.point[0] + p.l1 * leg;
  k.point[2] = k.point[1] + p.l2 * torso;

  Eigen::Matrix<double, 2, 3> j = Eigen::Matrix<double, 2, 3>::Zero();
  j.col(0) = k.lever * normal;
  k.jacobian[0] = j;
  j.col(1) = -p.l1 * leg_perp;
  k.jacobian[1] = j;
  j.col(2) = -p.l2 * torso_perp;
  k.jacobian[2] = j;

  k.bias[0] = (p.r * normal - k.lever * foot) * (s.dtheta * s.dtheta);
  k.bias[1] = k.bias[0] - p.l1 * leg * (s.dalpha * s.dalpha);
  k.bias[2] = k.bias[1] - p.l2 * torso * (s.dbeta * s.dbeta);
  return k;
}

MassPointPositions positions(const BodyParams& p, const State& s) {
  // Closed forms, written out so they can be checked against the kinematic
  // chain used by the dynamics.
  const double st = std::sin(s.theta), ct = std::cos(s.theta);
  MassPointPositions out;
  out.x0 = -p.r * st + s.theta * p.r * ct - p.l0 * ct;
  out.y0 = p.r * ct + s.theta * p.r * st - p.l0 * st;
  out.x1 = out.x0 - p.l1 * std::sin(s.alpha);
  out.y1 = out.y0 + p.l1 * std::cos(s.alpha);
  out.x2 = out.x1 - p.l2 * std::sin(s.beta);
  out.y2 = out.y1 + p.l2 * std::cos(s.beta);
  const double m = p.total_mass();
  out.com_x = (out.x0 * p.m0 + out.x1 * p.m1 + out.x2 * p.m2) / m;
  out.com_y = (out.y0 * p.m0 + out.y1 * p.m1 + out.y2 * p.m2) / m;
  return out;
}

Eigen::Vector2d com_velocity(const BodyParams& p, const State& s) {
  const PointKinematics k = point_kinematics(p, s);
  const Eigen::Vector3d qd = s.qdot();
  const Eigen::Vector2d v = p.m0 * (k.jacobian[0] * qd) + p.m1 * (k.jacobian[1] * qd) +
                            p.m2 * (k.jacobian[2] * qd);
  return v / p.total_mass();
}

JointAngles joint_angles(const State& s) {
  return {std::numbers::pi - s.alpha + s.beta, std::numbers::pi / 2 + s.alpha - s.theta};
}

std::optional<double> solve_torso_lean(const BodyParams& p, double theta, double alpha,
                                       double target) {
  // COM_x is strictly decreasing in beta on (-pi/2, pi/2).
  auto residual = [&](double beta) {
    return positions(p, State{theta, alpha, beta, 0.0, 0.0, 0.0}).com_x - target;
  };
  double lo = -std::numbers::pi / 2;
  double hi = std::numbers::pi / 2;
  double f_lo = residual(lo);
  const double f_hi = residual(hi);
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    return std::nullopt;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = residual(mid);
    if (std::abs(f_mid) < 1e-13 || hi - lo < 1e-15) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

EquilibriumPosture equilibrium_posture(const BodyParams& p) {
  p.validate();
  const auto beta0 = solve_torso_lean(p, 0.0, 0.0, 0.0);
  if (!beta0 || std::abs(*beta0) >= std::numbers::pi / 2) {
    throw NoEquilibrium("torso moment l2*m2 cannot bring the COM above the contact point");
  }
  EquilibriumPosture eq;
  eq.beta0 = *beta0;
  eq.com_y_eq = positions(p, eq.state()).com_y;
  eq.pendulum_length = eq.com_y_eq - p.r;
  return eq;
}

}  // namespace logbal
