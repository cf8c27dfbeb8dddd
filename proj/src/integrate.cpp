#include "logbal/integrate.hpp"

#include <cmath>
#include <string>

#include "logbal/errors.hpp"

namespace logbal {

namespace {

bool is_multiple(double big, double small) {
  const double n = std::round(big / small);
  return n >= 1.0 && std::abs(n * small - big) <= 1e-9 * big;
}

Vector6 checked(const Vector6& v, const char* stage) {
  if (!v.allFinite()) throw NonFinite(std::string("rk4_step: non-finite ") + stage);
  return v;
}

}  // namespace

void StepPolicy::validate() const {
  if (!(dt_physics_fine > 0.0 && dt_physics_fine <= dt_physics_nominal &&
        dt_physics_nominal <= dt_control && std::isfinite(dt_control))) {
    throw InvalidArgument("step policy requires 0 < dt_fine <= dt_physics <= dt_control");
  }
  if (!is_multiple(dt_control, dt_physics_nominal) || !is_multiple(dt_control, dt_physics_fine) ||
      !is_multiple(dt_physics_nominal, dt_physics_fine)) {
    throw InvalidArgument("dt_control must be an integer multiple of each physics step");
  }
}

State rk4_step(const Derivative& deriv, const State& s, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("rk4_step: dt must be positive");
  const Vector6 x = s.to_vector();
  const Vector6 k1 = checked(deriv(s), "stage 1");
  const Vector6 k2 = checked(deriv(State::from_vector(x + 0.5 * dt * k1)), "stage 2");
  const Vector6 k3 = checked(deriv(State::from_vector(x + 0.5 * dt * k2)), "stage 3");
  const Vector6 k4 = checked(deriv(State::from_vector(x + dt * k3)), "stage 4");
  const Vector6 out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return State::from_vector(checked(out, "result"));
}

State advance_control_period(const BodyParams& p, const State& s, const ControlTorques& u,
                             const StepPolicy& policy, int* substeps) {
  policy.validate();
  const auto ticks = static_cast<long>(std::round(policy.dt_control / policy.dt_physics_fine));
  const auto per_nominal =
      static_cast<long>(std::round(policy.dt_physics_nominal / policy.dt_physics_fine));
  const Derivative deriv = [&](const State& x) { return state_derivative(p, x, u); };

  State x = s;
  long done = 0;
  int steps = 0;
  while (done < ticks) {
    const bool fast = std::abs(x.dtheta) > policy.fine_trigger_rate ||
                      std::abs(x.dalpha) > policy.fine_trigger_rate ||
                      std::abs(x.dbeta) > policy.fine_trigger_rate;
    const bool fine = fast || positions(p, x).com_x < policy.fine_trigger_com ||
                      ticks - done < per_nominal;
    if (fine) {
      x = rk4_step(deriv, x, policy.dt_physics_fine);
      done += 1;
    } else {
      x = rk4_step(deriv, x, policy.dt_physics_nominal);
      done += per_nominal;
    }
    ++steps;
  }
  if (substeps) *substeps = steps;
  return x;
}

}  // namespace logbal
