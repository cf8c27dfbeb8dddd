// Command-line front end: simulate, sweep, montecarlo, lqr-report, energy-check.

#include <cmath>
#include <complex>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "logbal/errors.hpp"
#include "logbal/harness.hpp"
#include "logbal/lqr.hpp"
#include "logbal/scenario.hpp"

namespace {

using namespace logbal;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFell = 2;
constexpr int kExitDiagnostic = 3;
constexpr int kExitUsage = 64;

struct Common {
  std::string scenario;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("scenario", c.scenario, "scenario file (key = value lines)")->required();
  cmd->add_option("--set", c.sets, "override a scenario key, key=value; repeatable, last wins");
}

Scenario load(const Common& c) {
  Scenario sc = read_scenario(c.scenario);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + kv + "'");
    apply_setting(sc, kv.substr(0, eq), kv.substr(eq + 1));
  }
  sc.validate();
  return sc;
}

std::string modes(const RunMetrics& m) {
  std::string s;
  for (int v : m.mode_sequence) {
    if (!s.empty()) s += "->";
    s += std::to_string(v);
  }
  return s;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string summary(const RunMetrics& m) {
  std::string s = "converged=" + std::string(m.converged ? "true" : "false");
  s += " fell=" + std::string(m.fell ? "true" : "false");
  s += " settle_time=" + (m.settle_time ? fmt("%.2f", *m.settle_time) : std::string("none"));
  s += " dwell=" + fmt("%.2f", m.case_dwell[0]) + "/" + fmt("%.2f", m.case_dwell[1]) + "/" +
       fmt("%.2f", m.case_dwell[2]);
  s += " modes=" + modes(m);
  s += " max_excursion=" + fmt("%.4f", m.max_excursion);
  return s;
}

int outcome(const RunMetrics& m) {
  if (m.converged) return kExitOk;
  return m.fell ? kExitFell : kExitDiagnostic;
}

// "run.csv" -> "run_seed3.csv"
std::string suffixed(const std::string& path, const std::string& tag) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "_" + tag;
  return path.substr(0, dot) + "_" + tag + path.substr(dot);
}

void persist(const RunResult& r, const std::string& path) {
  if (path.empty()) return;
  write_trajectory(r.trajectory, path);
  write_metrics(r.metrics, path + ".json");
}

int cmd_simulate(const Common& c) {
  const Scenario sc = load(c);
  const RunResult r = run(sc);
  persist(r, sc.output);
  std::cout << summary(r.metrics) << '\n';
  return outcome(r.metrics);
}

int cmd_sweep(const Common& c, double from, double to, double step) {
  const Scenario sc = load(c);
  const SweepResult sw = sweep_stable_range(sc, make_grid(from, to, step));
  for (const auto& e : sw.entries) {
    std::cout << "offset=" << fmt("%+.4f", e.offset) << ' ' << summary(e.metrics) << '\n';
  }
  if (!sw.min_stable) {
    std::cout << "stable_range=none\n";
    return kExitDiagnostic;
  }
  std::cout << "stable_range=[" << fmt("%.4f", *sw.min_stable) << ", " << fmt("%.4f", *sw.max_stable)
            << "] width=" << fmt("%.4f", *sw.max_stable - *sw.min_stable) << '\n';
  return kExitOk;
}

int cmd_montecarlo(const Common& c, int seeds, double min_fraction) {
  const Scenario base = load(c);
  int converged = 0;
  bool sound = true;
  for (int i = 0; i < seeds; ++i) {
    Scenario sc = base;
    sc.sensor.seed = base.sensor.seed + static_cast<std::uint64_t>(i);
    const RunResult r = run(sc);
    if (!sc.output.empty()) persist(r, suffixed(sc.output, "seed" + std::to_string(sc.sensor.seed)));
    converged += r.metrics.converged ? 1 : 0;
    sound = sound && mode_graph_sound(r.trajectory);
    std::cout << "seed=" << sc.sensor.seed << ' ' << summary(r.metrics) << '\n';
  }
  const double frac = seeds > 0 ? static_cast<double>(converged) / seeds : 0.0;
  std::cout << "converged " << converged << "/" << seeds << " (" << fmt("%.1f", 100.0 * frac)
            << "%), mode graph " << (sound ? "sound" : "VIOLATED") << '\n';
  return frac >= min_fraction && sound ? kExitOk : kExitDiagnostic;
}

void print_matrix(const char* name, const Eigen::MatrixXd& m) {
  std::cout << "  " << name << " =";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::cout << (i == 0 ? " [" : "; ");
    for (Eigen::Index j = 0; j < m.cols(); ++j) std::cout << (j ? " " : "") << fmt("%.6g", m(i, j));
  }
  std::cout << "]\n";
}

int cmd_lqr_report(const Common& c) {
  const Scenario sc = load(c);
  const CaseConstants k = case_constants(sc.body);
  std::cout << "constants: C1=" << fmt("%.9g", k.C1) << " C3=" << fmt("%.9g", k.C3)
            << " C4=" << fmt("%.9g", k.C4) << " L=" << fmt("%.9g", k.L) << '\n';
  const double gap = std::abs(k.C1 - k.C3 * k.C4) / std::abs(k.C1);
  std::cout << "identity C1 = C3*C4: relative gap " << fmt("%.3e", gap) << '\n';
  bool ok = gap < 1e-12;
  for (const LinearPlant& pl : build_case_plants(sc.body, sc.penalties)) {
    std::cout << to_string(pl.label) << " (" << pl.input_note << ")\n";
    print_matrix("A", pl.A);
    print_matrix("B", pl.B);
    print_matrix("Q", pl.Q);
    print_matrix("R", pl.R);
    try {
      const LqrGain g = solve_care(pl);
      const double res = riccati_residual(pl, g.P);
      const bool stable = closed_loop_stable(pl, g.K);
      print_matrix("K", g.K);
      std::cout << "  residual = " << fmt("%.3e", res) << '\n';
      std::cout << "  closed-loop eigenvalues =";
      for (const auto& e : closed_loop_eigenvalues(pl, g.K)) {
        std::cout << ' ' << fmt("%.6g", e.real()) << (e.imag() < 0 ? "-" : "+")
                  << fmt("%.6g", std::abs(e.imag())) << 'i';
      }
      std::cout << "\n  " << (stable ? "stable" : "UNSTABLE") << '\n';
      ok = ok && res < 1e-8 && stable;
    } catch (const Error& e) {
      std::cout << "  synthesis failed: " << e.what() << '\n';
      ok = false;
    }
  }
  return ok ? kExitOk : kExitDiagnostic;
}

int cmd_energy_check(const Common& c, double duration, const std::string& torque) {
  const Scenario sc = load(c);
  const EquilibriumPosture eq = equilibrium_posture(sc.body);
  const State s0 = sc.initial_state ? *sc.initial_state
                                    : init_from_com_offset(sc.body, eq, sc.initial_com_offset);
  ControlTorques u;
  if (torque == "hold") u = static_torques(sc.body, eq.state());
  const double dt = sc.policy.dt_physics_fine;
  const EnergyDrift d = energy_drift(sc.body, s0, u, dt, duration);
  std::cout << "torque=" << torque << " dt=" << fmt("%g", dt) << " duration=" << fmt("%g", duration)
            << " steps=" << d.steps << " relative_drift=" << fmt("%.3e", d.relative) << '\n';
  if (!d.failure.empty()) std::cout << "stopped: " << d.failure << '\n';
  return d.relative < 1e-6 ? kExitOk : kExitDiagnostic;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Switched LQR/PID balance controller for a three-mass body on a log"};
  app.require_subcommand(1);

  Common sim_args, sweep_args, mc_args, lqr_args, energy_args;
  auto* sim = app.add_subcommand("simulate", "run one scenario; writes CSV and metrics JSON to `output`");
  add_common(sim, sim_args);

  double from = -0.05, to = 0.096, step = 0.01;
  auto* sweep = app.add_subcommand("sweep", "stabilizable initial-COM range over a grid of offsets");
  add_common(sweep, sweep_args);
  sweep->add_option("--from", from, "first offset [m]");
  sweep->add_option("--to", to, "last offset [m]");
  sweep->add_option("--step", step, "grid step [m]")->check(CLI::PositiveNumber);

  int seeds = 20;
  double min_fraction = 0.9;
  auto* mc = app.add_subcommand("montecarlo", "repeat a noisy scenario over consecutive seeds");
  add_common(mc, mc_args);
  mc->add_option("--seeds", seeds, "number of seeds")->check(CLI::PositiveNumber);
  mc->add_option("--min-fraction", min_fraction, "converged fraction needed for exit 0")
      ->check(CLI::Range(0.0, 1.0));

  auto* lqr = app.add_subcommand("lqr-report", "case plants, gains, residuals, closed-loop poles");
  add_common(lqr, lqr_args);

  double duration = 1.0;
  std::string torque = "zero";
  auto* energy = app.add_subcommand("energy-check", "energy drift under constant joint torques");
  add_common(energy, energy_args);
  energy->add_option("--duration", duration, "integration time [s]")->check(CLI::NonNegativeNumber);
  energy->add_option("--torque", torque, "zero, or hold (equilibrium holding torques)")
      ->check(CLI::IsMember({"zero", "hold"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*sim) return cmd_simulate(sim_args);
    if (*sweep) return cmd_sweep(sweep_args, from, to, step);
    if (*mc) return cmd_montecarlo(mc_args, seeds, min_fraction);
    if (*lqr) return cmd_lqr_report(lqr_args);
    if (*energy) return cmd_energy_check(energy_args, duration, torque);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
