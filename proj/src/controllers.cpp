#include "logbal/controllers.hpp"

#include <algorithm>
#include <cmath>

#include "logbal/errors.hpp"

namespace logbal {

namespace {

double apply_gain(const LqrGain& gain, double a, double b) {
  return -(gain.K(0, 0) * a + gain.K(0, 1) * b);
}

}  // namespace

bool transition_allowed(CaseMode from, CaseMode to) {
  if (from == to) return true;
  return !((from == CaseMode::Case2 && to == CaseMode::Case1) ||
           (from == CaseMode::Case1 && to == CaseMode::Case3));
}

void Thresholds::validate() const {
  if (!(beta_exit3 < beta_case1 && beta_case1 < beta_case2)) {
    throw InvalidArgument("thresholds need beta_exit3 < beta_case1 < beta_case2");
  }
  if (!(com_small > 0.0)) throw InvalidArgument("thresholds.com_small must be positive");
  if (!(c2_offset > 0.0 && c2_offset < 0.1)) throw InvalidArgument("c2_offset must be in (0, 0.1)");
  if (!(clip_limit > 0.0 && clip_limit <= std::numbers::pi / 2)) {
    throw InvalidArgument("clip_limit must be in (0, pi/2]");
  }
}

CaseMode classify(const Thresholds& th, double com_x, double beta_dev, CaseMode current) {
  const bool com_large = std::abs(com_x) > th.com_small;
  switch (current) {
    case CaseMode::Case1:
      return com_large ? CaseMode::Case2 : CaseMode::Case1;
    case CaseMode::Case2:
      return com_large ? CaseMode::Case2 : CaseMode::Case3;
    case CaseMode::Case3:
      if (com_large) return CaseMode::Case2;
      if (std::abs(beta_dev) <= th.beta_exit3) return CaseMode::Case1;
      return CaseMode::Case3;
  }
  return current;
}

double foot_target_from_contact(double u, double sign, double clip) {
  const double angle = std::asin(std::clamp(sign * u, -1.0, 1.0));
  return std::clamp(angle, -clip, clip);
}

ControlDecision case1_control(const LqrGain& gain, const HipStiffness& stiff, const BodyParams&,
                              const EquilibriumPosture& eq, const Sensed& x, double clip_limit) {
  const State& s = x.state;
  ControlDecision d;
  d.mode = CaseMode::Case1;
  const double hip_dev = (s.beta - s.alpha) - eq.beta0;
  const double hip_rate = s.dbeta - s.dalpha;
  d.tau2 = -stiff.kp * hip_dev - stiff.kd * hip_rate;
  d.foot_target = foot_target_from_contact(apply_gain(gain, x.com_x, x.com_rate), -1.0, clip_limit);
  return d;
}

ControlDecision case2_control(const LqrGain& gain, const Thresholds& th, const Sensed& x) {
  ControlDecision d;
  d.mode = CaseMode::Case2;
  d.tau2 = apply_gain(gain, x.com_x, x.com_rate);
  const double offset = x.com_x > 0.0 ? -th.c2_offset : th.c2_offset;
  const double gamma = -std::asin(std::clamp(x.com_x, -1.0, 1.0)) + offset;
  d.foot_target = std::clamp(gamma, -th.clip_limit, th.clip_limit);
  return d;
}

ControlDecision case3_control(const LqrGain& hip_gain, const LqrGain& ankle_gain,
                              const CaseConstants& consts, const BodyParams& p,
                              const EquilibriumPosture& eq, const Sensed& x, double clip_limit) {
  const State& s = x.state;
  ControlDecision d;
  d.mode = CaseMode::Case3;
  d.tau2 = apply_gain(hip_gain, s.beta - eq.beta0, s.dbeta);
  const double predicted_ddbeta = consts.C3 * d.tau2;
  const double feedforward = -consts.C4 * predicted_ddbeta * consts.L / p.g;
  const double u = apply_gain(ankle_gain, x.com_x, x.com_rate) + feedforward / p.r;
  d.foot_target = foot_target_from_contact(u, 1.0, clip_limit);
  return d;
}

ControllerBundle make_controller(const BodyParams& p, const PenaltyConfig& penalties,
                                 const Thresholds& th, const HipStiffness& stiff,
                                 const PidGains& pid, const TorqueLimits& limits) {
  th.validate();
  pid.validate();
  ControllerBundle c;
  c.body = p;
  c.eq = equilibrium_posture(p);
  c.consts = case_constants(p);
  c.thresholds = th;
  const auto plants = build_case_plants(p, penalties);
  c.case1 = solve_care(plants[0]);
  c.case2 = solve_care(plants[1]);
  c.case3_hip = solve_care(plants[2]);
  c.case3_ankle = solve_care(plants[3]);
  c.stiffness = stiff;
  c.pid = pid;
  c.limits = limits;
  return c;
}

double foot_holding_torque(const BodyParams& p, const State& s, double tau2) {
  const double a0 = forward_dynamics(p, s, {0.0, tau2}).ddtheta;
  const double a1 = forward_dynamics(p, s, {1.0, tau2}).ddtheta - a0;
  if (!(std::abs(a1) > 1e-12)) throw SingularMass("foot acceleration does not depend on tau1");
  return -a0 / a1;
}

SupervisorOutput supervise(const ControllerBundle& c, const ControllerState& st,
                           const Sensed& raw, double t, double dt) {
  SupervisorOutput out;
  out.next = st;
  Sensed x = raw;
  if (c.com_blend > 0.0) {
    if (st.com_filtered) {
      const double predicted = *st.com_filtered + 0.5 * dt * (st.com_rate_prev + raw.com_rate);
      x.com_x = c.com_blend * predicted + (1.0 - c.com_blend) * raw.com_x;
    }
    out.next.com_filtered = x.com_x;
    out.next.com_rate_prev = raw.com_rate;
  }
  const double beta_dev = x.state.beta - c.eq.beta0;
  CaseMode mode = st.mode;
  if (c.switching && t - st.entered_at >= dt * (1.0 - 1e-9)) {
    mode = classify(c.thresholds, x.com_x, beta_dev, st.mode);
  }
  if (mode != st.mode) {
    out.next.mode = mode;
    out.next.entered_at = t;
  }

  switch (mode) {
    case CaseMode::Case1:
      out.decision = case1_control(c.case1, c.stiffness, c.body, c.eq, x, c.thresholds.clip_limit);
      break;
    case CaseMode::Case2:
      out.decision = case2_control(c.case2, c.thresholds, x);
      break;
    case CaseMode::Case3:
      out.decision = case3_control(c.case3_hip, c.case3_ankle, c.consts, c.body, c.eq, x,
                                   c.thresholds.clip_limit);
      break;
  }

  const PidOutput pid = pid_step(c.pid, st.pid, out.decision.foot_target, x.state.theta,
                                 x.state.dtheta, dt);
  out.next.pid = pid.state;
  // tau1 acts on the leg; the reaction turns the foot, so a positive tracker
  // output lowers tau1.
  ControlTorques u{-pid.output, out.decision.tau2};
  if (c.gravity_compensation) {
    const ControlTorques hold = static_torques(c.body, x.state);
    u.tau2 = std::clamp(u.tau2 + hold.tau2, -c.limits.tau2_max, c.limits.tau2_max);
    double hold1 = hold.tau1;
    if (c.foot_feedforward) {
      try {
        hold1 = foot_holding_torque(c.body, x.state, u.tau2);
      } catch (const Error&) {
        // Degenerate posture: keep the static value.
      }
    }
    u.tau1 += hold1;
  }
  out.torques = c.limits.saturate(u);
  return out;
}

}  // namespace logbal
