#include "logbal/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include "json.hpp"

#include "logbal/errors.hpp"

namespace logbal {

namespace {

bool fallen(const State& s) { return !s.finite() || std::abs(s.theta) > std::numbers::pi / 2; }

Sensed to_sensed(const Measurement& m, const Vector6& angles) {
  return {State::from_vector(angles), m.com_x, m.com_rate};
}

}  // namespace

State init_from_com_offset(const BodyParams& p, const EquilibriumPosture& eq, double offset) {
  if (offset == 0.0) return eq.state();
  const auto beta = solve_torso_lean(p, 0.0, 0.0, offset);
  if (!beta) throw NoPosture("no torso lean reaches COM offset " + std::to_string(offset));
  return State{0.0, 0.0, *beta, 0.0, 0.0, 0.0};
}

RunResult run(const Scenario& sc) {
  sc.validate();
  if (sc.sensor.dropped_channel && sc.actuation != Actuation::Muscle) {
    throw InvalidArgument("dropped_channel needs actuation = muscle (the estimator runs there)");
  }
  const BodyParams& p = sc.body;
  const EquilibriumPosture eq = equilibrium_posture(p);
  const double dt = sc.policy.dt_control;
  State x = sc.initial_state ? *sc.initial_state : init_from_com_offset(p, eq, sc.initial_com_offset);
  Rng rng(sc.sensor.seed);
  const auto steps = static_cast<long>(std::llround(sc.duration / dt));
  const Vector6 x_eq = eq.state().to_vector();

  const bool muscle = sc.actuation == Actuation::Muscle;
  ControllerBundle bundle;
  ControllerState cs;
  LinearPlant mplant;
  LqrGain mgain;
  ControlTorques hold_eq;
  std::optional<KalmanModel> km;
  KalmanState ks;
  Eigen::Vector2d last_u = Eigen::Vector2d::Zero();
  if (muscle) {
    mplant = muscle_plant(p, sc.muscle, eq);
    mgain = solve_care(mplant);
    hold_eq = static_torques(p, eq.state());
    if (sc.sensor.dropped_channel) {
      const TorquePlant tp = linearize_torque_plant(p, eq);
      Eigen::MatrixXd com_rows;
      SensorModel assumed = sc.sensor;
      for (double* s : {&assumed.std_com, &assumed.std_com_rate, &assumed.std_angle, &assumed.std_rate}) {
        *s = std::max(*s, sc.filter_noise_floor);
      }
      // Noise-free COM rows would duplicate exact angle information and make
      // the innovation covariance singular.
      if (sc.filter_com && assumed.std_com > 0.0 && assumed.std_com_rate > 0.0) {
        com_rows = linearize_com_output(p, eq);
      }
      km = make_kalman_model(tp.A, tp.B, dt, assumed, sc.process_noise, sc.process_noise_rate,
                             com_rows);
    }
  } else {
    bundle = make_controller(p, sc.penalties, sc.thresholds, sc.stiffness, sc.pid, sc.limits);
    bundle.switching = sc.switching;
    bundle.com_blend = sc.com_blend;
  }

  RunResult out;
  bool fell = fallen(x);
  for (long k = 0; k <= steps && !fell; ++k) {
    const double t = static_cast<double>(k) * dt;
    const MassPointPositions pos = positions(p, x);
    const Eigen::Vector2d vcom = com_velocity(p, x);
    const Measurement meas = sense(sc.sensor, x, pos.com_x, vcom.x(), rng);

    TrajectorySample row;
    row.t = t;
    row.state = x;
    row.com_x = pos.com_x;
    row.com_y = pos.com_y;

    ControlTorques u;
    if (muscle) {
      Vector6 dev;
      if (km) {
        const Eigen::MatrixXd select = measurement_matrix(sc.sensor);
        const auto n_ang = select.rows();
        // COM readings are deviations already: the upright COM sits at x = 0.
        Eigen::VectorXd z = Eigen::VectorXd::Zero(km->H.rows());
        z.head(n_ang) = meas.z - select * x_eq;
        if (km->H.rows() > n_ang) z.tail(2) << meas.com_x, meas.com_rate;
        if (k == 0) {
          const Eigen::MatrixXd r_ang = km->R.topLeftCorner(n_ang, n_ang);
          ks.x_hat = select.transpose() * z.head(n_ang);
          ks.P = select.transpose() * r_ang * select;
          ks.P(*sc.sensor.dropped_channel, *sc.sensor.dropped_channel) = 0.01;
          ks.P.diagonal().array() += sc.process_noise;
        } else {
          ks = kalman_step(*km, ks, last_u, z);
        }
        dev = ks.x_hat;
        row.x_hat = Vector6(dev + x_eq);
      } else {
        dev = meas.z - x_eq;
      }
      const Activation a = muscle_controller_step(mgain, mplant, sc.muscle, dev, hold_eq);
      u = activation_torques(sc.muscle, a);
      row.activations = a;
      row.mode = 1;
      last_u << u.tau1 - hold_eq.tau1, u.tau2 - hold_eq.tau2;
    } else {
      const SupervisorOutput so = supervise(bundle, cs, to_sensed(meas, meas.z), t, dt);
      cs = so.next;
      u = so.torques;
      row.foot_target = so.decision.foot_target;
      row.mode = static_cast<int>(so.decision.mode);
    }
    row.tau1 = u.tau1;
    row.tau2 = u.tau2;
    out.trajectory.push_back(row);
    if (k == steps) break;

    try {
      x = advance_control_period(p, x, u, sc.policy);
    } catch (const NonFinite&) {
      fell = true;
    } catch (const SingularMass&) {
      fell = true;
    }
    fell = fell || fallen(x);
  }
  out.metrics = compute_metrics(out.trajectory, eq.beta0, fell, dt);
  return out;
}

RunMetrics compute_metrics(const TrajectoryRecord& rec, double beta0, bool fell, double dt) {
  RunMetrics m;
  m.fell = fell;
  if (rec.empty()) return m;
  m.final_time = rec.back().t;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const auto& s = rec[i];
    m.max_excursion = std::max(m.max_excursion, std::abs(s.com_x));
    if (i + 1 < rec.size() || fell) m.case_dwell[static_cast<std::size_t>(s.mode - 1)] += dt;
    if (m.mode_sequence.empty() || m.mode_sequence.back() != s.mode) m.mode_sequence.push_back(s.mode);
  }
  if (fell) return m;
  auto window = [&](auto&& good) -> std::optional<double> {
    std::size_t i = rec.size();
    while (i > 0 && good(rec[i - 1])) --i;
    if (i == rec.size()) return std::nullopt;
    return rec[i].t;
  };
  m.settle_time = window([&](const TrajectorySample& s) {
    return std::abs(s.com_x) < kSettleCom && std::abs(s.state.beta - beta0) < kSettleBeta;
  });
  m.com_settle_time = window([](const TrajectorySample& s) { return std::abs(s.com_x) < kSettleCom; });
  m.converged = m.settle_time.has_value();
  return m;
}

bool mode_graph_sound(const TrajectoryRecord& rec) {
  for (std::size_t i = 1; i < rec.size(); ++i) {
    if (!transition_allowed(static_cast<CaseMode>(rec[i - 1].mode),
                            static_cast<CaseMode>(rec[i].mode))) {
      return false;
    }
  }
  return true;
}

std::vector<double> make_grid(double from, double to, double step) {
  if (!(step > 0.0) || !(to >= from)) throw InvalidArgument("grid needs step > 0 and to >= from");
  const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
  std::vector<double> g;
  for (long i = 0; i <= n; ++i) {
    g.push_back(std::round((from + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return g;
}

SweepResult sweep_stable_range(const Scenario& base, const std::vector<double>& grid) {
  SweepResult out;
  for (double offset : grid) {
    Scenario sc = base;
    sc.initial_state.reset();
    sc.initial_com_offset = offset;
    SweepEntry e{offset, {}};
    try {
      e.metrics = run(sc).metrics;
    } catch (const NoPosture&) {
      e.metrics.fell = true;
    }
    out.entries.push_back(e);
  }
  if (grid.empty()) return out;
  std::size_t centre = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs(grid[i]) < std::abs(grid[centre])) centre = i;
  }
  if (!out.entries[centre].metrics.converged) return out;
  std::size_t lo = centre, hi = centre;
  while (lo > 0 && out.entries[lo - 1].metrics.converged) --lo;
  while (hi + 1 < grid.size() && out.entries[hi + 1].metrics.converged) ++hi;
  out.min_stable = grid[lo];
  out.max_stable = grid[hi];
  return out;
}

EnergyDrift energy_drift(const BodyParams& p, const State& s0, const ControlTorques& u, double dt,
                         double duration) {
  if (!(dt > 0.0) || !(duration >= 0.0)) throw InvalidArgument("energy_drift needs dt > 0, duration >= 0");
  auto h = [&](const State& s) {
    return total_energy(p, s) - u.tau1 * (s.alpha - s.theta) - u.tau2 * (s.beta - s.alpha);
  };
  const double h0 = h(s0);
  const double scale = std::max(std::abs(h0), 1e-300);
  const auto n = static_cast<long>(std::llround(duration / dt));
  const Derivative f = [&](const State& x) { return state_derivative(p, x, u); };
  EnergyDrift out;
  State s = s0;
  try {
    for (long k = 0; k < n; ++k) {
      s = rk4_step(f, s, dt);
      ++out.steps;
      out.relative = std::max(out.relative, std::abs(h(s) - h0) / scale);
    }
  } catch (const Error& e) {
    out.relative = std::numeric_limits<double>::infinity();
    out.failure = e.what();
  }
  return out;
}

std::string trajectory_header() {
  return "t,theta,alpha,beta,dtheta,dalpha,dbeta,com_x,com_y,tau1,tau2,foot_target,mode,"
         "a1,a2,a3,a4,xhat_theta,xhat_alpha,xhat_beta,xhat_dtheta,xhat_dalpha,xhat_dbeta";
}

void write_trajectory(const TrajectoryRecord& rec, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write trajectory '" + path + "'");
  f << trajectory_header() << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    f << buf;
  };
  for (const auto& s : rec) {
    const double values[] = {s.t, s.state.theta, s.state.alpha, s.state.beta, s.state.dtheta,
                             s.state.dalpha, s.state.dbeta, s.com_x, s.com_y, s.tau1, s.tau2,
                             s.foot_target};
    for (double v : values) {
      put(v);
      f << ',';
    }
    f << s.mode;
    for (int i = 0; i < 4; ++i) {
      f << ',';
      if (s.activations) put((*s.activations)[i]);
    }
    for (int i = 0; i < 6; ++i) {
      f << ',';
      if (s.x_hat) put((*s.x_hat)[i]);
    }
    f << '\n';
  }
  if (!f) throw Error("write failed for '" + path + "'");
}

std::string metrics_json(const RunMetrics& m) {
  nlohmann::ordered_json j;
  j["converged"] = m.converged;
  j["settle_time"] = m.settle_time ? nlohmann::ordered_json(*m.settle_time) : nullptr;
  j["com_settle_time"] = m.com_settle_time ? nlohmann::ordered_json(*m.com_settle_time) : nullptr;
  j["case_dwell"] = {{"case1", m.case_dwell[0]}, {"case2", m.case_dwell[1]}, {"case3", m.case_dwell[2]}};
  j["max_excursion"] = m.max_excursion;
  j["fell"] = m.fell;
  j["mode_sequence"] = m.mode_sequence;
  j["final_time"] = m.final_time;
  return j.dump(2);
}

void write_metrics(const RunMetrics& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write metrics '" + path + "'");
  f << metrics_json(m) << '\n';
}

}  // namespace logbal
