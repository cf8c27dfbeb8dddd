#pragma once

namespace logbal {

struct PidGains {
  double kp = 120.0;
  double ki = 0.0;
  double kd = 8.0;
  double integral_limit = 0.5;
  double output_limit = 200.0;

  void validate() const;
};

struct PidState {
  double integral = 0.0;
  double previous_measurement = 0.0;
};

struct PidOutput {
  double output = 0.0;
  PidState state;
};

/// Derivative on measurement: the rate enters as -kd * measured_rate so a
/// target jump does not kick the output.
PidOutput pid_step(const PidGains& g, const PidState& st, double target, double measured,
                   double measured_rate, double dt);

}  // namespace logbal
