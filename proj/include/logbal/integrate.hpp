#pragma once

#include <functional>

#include "logbal/dynamics.hpp"
#include "logbal/model.hpp"

namespace logbal {

using Derivative = std::function<Vector6(const State&)>;

struct StepPolicy {
  double dt_control = 0.02;
  double dt_physics_nominal = 0.002;
  double dt_physics_fine = 0.001;
  double fine_trigger_com = 0.0;
  /// Any |rate| above this also selects the fine step.
  double fine_trigger_rate = 3.0;

  /// Throws InvalidArgument unless fine <= nominal <= control, all positive,
  /// and the control period is an integer multiple of both physics steps.
  void validate() const;
};

/// Classical RK4 step. Throws NonFinite if any stage is non-finite.
State rk4_step(const Derivative& deriv, const State& s, double dt);

/// Integrates one control period with u held constant. `substeps`, when
/// given, receives the number of RK4 steps taken.
State advance_control_period(const BodyParams& p, const State& s, const ControlTorques& u,
                             const StepPolicy& policy, int* substeps = nullptr);

}  // namespace logbal
