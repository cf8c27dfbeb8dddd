#pragma once

#include <optional>
#include <string>

#include "logbal/controllers.hpp"
#include "logbal/estimate.hpp"
#include "logbal/integrate.hpp"
#include "logbal/lqr.hpp"
#include "logbal/model.hpp"
#include "logbal/muscle.hpp"
#include "logbal/pid.hpp"

namespace logbal {

enum class Actuation { Torque, Muscle };

struct Scenario {
  BodyParams body;
  /// Used when set; otherwise the posture is built from initial_com_offset.
  std::optional<State> initial_state;
  double initial_com_offset = 0.0;
  double duration = 10.0;
  StepPolicy policy;
  Thresholds thresholds;
  PenaltyConfig penalties;
  HipStiffness stiffness;
  PidGains pid;
  TorqueLimits limits;
  bool switching = true;
  /// Weight of the rate-integrated COM prediction; 0 disables the filter.
  double com_blend = 0.85;
  Actuation actuation = Actuation::Torque;
  MuscleParams muscle;
  /// Noise is off unless configured.
  SensorModel sensor = SensorModel::noiseless();
  double process_noise = 1e-6;
  double process_noise_rate = 1e-5;
  /// Lower bound on each measurement std the filter assumes. The true
  /// sensor noise is unaffected.
  double filter_noise_floor = 5e-3;
  /// Feed the COM position and rate readings to the Kalman filter.
  bool filter_com = true;
  std::string output;

  void validate() const;

  friend bool operator==(const Scenario&, const Scenario&);
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys and bad
/// values raise ParseError naming the source, line and key.
Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
Scenario read_scenario(const std::string& path);

/// Sets one key using the file syntax; throws ParseError.
void apply_setting(Scenario& sc, const std::string& key, const std::string& value);

/// Every key, values printed with round-trip precision.
std::string format_scenario(const Scenario& sc);
void write_scenario(const Scenario& sc, const std::string& path);

}  // namespace logbal
