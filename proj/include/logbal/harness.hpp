#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "logbal/controllers.hpp"
#include "logbal/model.hpp"
#include "logbal/scenario.hpp"

namespace logbal {

struct TrajectorySample {
  double t = 0.0;
  State state;
  double com_x = 0.0;
  double com_y = 0.0;
  double tau1 = 0.0;
  double tau2 = 0.0;
  double foot_target = 0.0;
  int mode = 1;
  std::optional<Activation> activations;
  std::optional<Vector6> x_hat;
};

using TrajectoryRecord = std::vector<TrajectorySample>;

struct RunMetrics {
  bool converged = false;
  /// First sample time after which |com_x| < 0.005 and |beta - beta0| < 0.01
  /// hold on every later sample.
  std::optional<double> settle_time;
  /// Same window on |com_x| alone.
  std::optional<double> com_settle_time;
  std::array<double, 3> case_dwell{0.0, 0.0, 0.0};
  double max_excursion = 0.0;
  bool fell = false;
  std::vector<int> mode_sequence;
  double final_time = 0.0;
};

struct RunResult {
  TrajectoryRecord trajectory;
  RunMetrics metrics;
};

inline constexpr double kSettleCom = 0.005;
inline constexpr double kSettleBeta = 0.01;

/// Rest state with theta = alpha = 0 and the torso lean that puts COM_x at
/// `offset`. Throws NoPosture when no lean in (-pi/2, pi/2) reaches it.
State init_from_com_offset(const BodyParams& p, const EquilibriumPosture& eq, double offset);

/// Simulates the scenario. A fall (|theta| > pi/2 or a numerical blow-up)
/// ends the run and is reported in the metrics.
RunResult run(const Scenario& sc);

RunMetrics compute_metrics(const TrajectoryRecord& rec, double beta0, bool fell, double dt);

/// True when the logged modes never take a 2->1 or 1->3 edge.
bool mode_graph_sound(const TrajectoryRecord& rec);

struct SweepEntry {
  double offset = 0.0;
  RunMetrics metrics;
};

struct SweepResult {
  /// Ends of the longest run of converged grid points around the point
  /// nearest 0; empty when that point does not converge.
  std::optional<double> min_stable;
  std::optional<double> max_stable;
  std::vector<SweepEntry> entries;
};

SweepResult sweep_stable_range(const Scenario& base, const std::vector<double>& grid);

/// Inclusive grid from..to with the given step, rounded to the step.
std::vector<double> make_grid(double from, double to, double step);

struct EnergyDrift {
  /// max |H(t) - H(0)| / |H(0)| over the run, H = energy minus the work of
  /// the constant torques; infinite when the integration broke down.
  double relative = 0.0;
  int steps = 0;
  /// Empty unless the run stopped early.
  std::string failure;
};

/// RK4 at fixed step dt with the torques u held constant for the whole run.
/// Constant joint torques are conservative, so H should not move.
EnergyDrift energy_drift(const BodyParams& p, const State& s0, const ControlTorques& u, double dt,
                         double duration);

std::string trajectory_header();
void write_trajectory(const TrajectoryRecord& rec, const std::string& path);
std::string metrics_json(const RunMetrics& m);
void write_metrics(const RunMetrics& m, const std::string& path);

}  // namespace logbal
