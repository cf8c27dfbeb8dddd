#pragma once

#include <limits>
#include <optional>
#include <numbers>

#include <Eigen/Dense>

#include "logbal/dynamics.hpp"
#include "logbal/lqr.hpp"
#include "logbal/model.hpp"
#include "logbal/pid.hpp"

namespace logbal {

enum class CaseMode { Case1 = 1, Case2 = 2, Case3 = 3 };

/// Edges allowed by the switching graph (self-loops included).
bool transition_allowed(CaseMode from, CaseMode to);

struct Thresholds {
  double com_small = 0.04;
  double beta_case1 = 0.1;
  double beta_case2 = 1.0;
  double beta_exit3 = 0.005;
  double c2_offset = 0.02;
  double clip_limit = std::numbers::pi / 6;

  void validate() const;
};

/// What the controller sees: angles and rates plus the COM channel.
struct Sensed {
  State state;
  double com_x = 0.0;
  double com_rate = 0.0;
};

struct ControlDecision {
  double foot_target = 0.0;
  /// Hip feedback torque; gravity compensation is added by supervise().
  double tau2 = 0.0;
  CaseMode mode = CaseMode::Case1;
};

struct HipStiffness {
  double kp = 100.0;
  double kd = 80.0;
};

CaseMode classify(const Thresholds& th, double com_x, double beta_dev, CaseMode current);

/// asin(sign * u) with u clamped to [-1, 1], then clipped to +-clip.
double foot_target_from_contact(double u, double sign, double clip);

/// Ankle strategy. The gain acts on (COM_x, COM rate) and returns
/// u = x_contact / r with target asin(-u); the hip is held stiff about its
/// equilibrium angle.
ControlDecision case1_control(const LqrGain& gain, const HipStiffness& stiff, const BodyParams& p,
                              const EquilibriumPosture& eq, const Sensed& x,
                              double clip_limit = std::numbers::pi / 6);

/// Hip strategy: tau2 = -K (COM_x, COM rate), foot turned against the COM.
ControlDecision case2_control(const LqrGain& gain, const Thresholds& th, const Sensed& x);

/// Torso recovery with the predicted torso acceleration fed forward to the
/// ankle planner.
ControlDecision case3_control(const LqrGain& hip_gain, const LqrGain& ankle_gain,
                              const CaseConstants& consts, const BodyParams& p,
                              const EquilibriumPosture& eq, const Sensed& x,
                              double clip_limit = std::numbers::pi / 6);

struct ControllerBundle {
  BodyParams body;
  EquilibriumPosture eq;
  CaseConstants consts;
  Thresholds thresholds;
  LqrGain case1;
  LqrGain case2;
  LqrGain case3_hip;
  LqrGain case3_ankle;
  HipStiffness stiffness;
  PidGains pid;
  TorqueLimits limits;
  /// When false the supervisor stays in Case 1.
  bool switching = true;
  /// Adds the holding torques of the sensed posture to both joints.
  bool gravity_compensation = true;
  /// Replaces the static ankle torque by the one that gives zero foot
  /// acceleration under the sensed state and the commanded hip torque.
  bool foot_feedforward = true;
  /// Complementary COM filter: weight on the rate-integrated prediction.
  /// Zero uses the raw COM measurement.
  double com_blend = 0.85;
};

/// Synthesizes the four case gains and assembles a bundle.
ControllerBundle make_controller(const BodyParams& p, const PenaltyConfig& penalties,
                                 const Thresholds& th, const HipStiffness& stiff,
                                 const PidGains& pid, const TorqueLimits& limits = {});

struct ControllerState {
  CaseMode mode = CaseMode::Case1;
  double entered_at = -std::numeric_limits<double>::infinity();
  PidState pid;
  /// Filtered COM position and the COM rate seen last period.
  std::optional<double> com_filtered;
  double com_rate_prev = 0.0;
};

struct SupervisorOutput {
  ControlTorques torques;
  ControlDecision decision;
  ControllerState next;
};

/// Ankle torque giving zero foot acceleration at state s with hip torque
/// tau2 (the foot acceleration is affine in tau1).
double foot_holding_torque(const BodyParams& p, const State& s, double tau2);

/// One control period: classify, plan, track the foot target with the PID,
/// add the holding torques, saturate.
SupervisorOutput supervise(const ControllerBundle& c, const ControllerState& st, const Sensed& x,
                           double t, double dt);

}  // namespace logbal
