#include "logbal/pid.hpp"

#include <algorithm>
#include <cmath>

#include "logbal/errors.hpp"

namespace logbal {

void PidGains::validate() const {
  if (!(kp >= 0.0 && ki >= 0.0 && kd >= 0.0)) throw InvalidArgument("PID gains must be >= 0");
  if (!(integral_limit > 0.0 && output_limit > 0.0)) {
    throw InvalidArgument("PID limits must be positive");
  }
}

PidOutput pid_step(const PidGains& g, const PidState& st, double target, double measured,
                   double measured_rate, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("pid_step: dt must be positive");
  const double e = target - measured;
  PidOutput out;
  out.state.integral = std::clamp(st.integral + e * dt, -g.integral_limit, g.integral_limit);
  out.state.previous_measurement = measured;
  const double u = g.kp * e + g.ki * out.state.integral - g.kd * measured_rate;
  out.output = std::clamp(u, -g.output_limit, g.output_limit);
  return out;
}

}  // namespace logbal
