#include "logbal/scenario.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "logbal/errors.hpp"

namespace logbal {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(d)) {
    throw ParseError("key '" + key + "': expected a number, got '" + v + "'");
  }
  return d;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ParseError("key '" + key + "': expected true or false, got '" + v + "'");
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

State& initial(Scenario& sc) {
  if (!sc.initial_state) sc.initial_state = State{};
  return *sc.initial_state;
}

}  // namespace

bool operator==(const Scenario& a, const Scenario& b) {
  return format_scenario(a) == format_scenario(b);
}

void Scenario::validate() const {
  body.validate();
  if (!(duration >= 0.0 && std::isfinite(duration))) {
    throw InvalidArgument("duration must be finite and >= 0");
  }
  if (!initial_state && !(std::abs(initial_com_offset) < body.r)) {
    throw InvalidArgument("initial_com_offset must lie in (-r, r)");
  }
  if (initial_state && !initial_state->finite()) throw InvalidArgument("initial state not finite");
  policy.validate();
  thresholds.validate();
  pid.validate();
  muscle.validate();
  sensor.validate();
  if (!(penalties.case1 >= 0.0 && penalties.case2 >= 0.0 && penalties.case3 >= 0.0 &&
        penalties.case2_rate >= 0.0)) {
    throw InvalidArgument("penalties must be >= 0");
  }
  if (!(process_noise >= 0.0 && process_noise_rate >= 0.0 && filter_noise_floor >= 0.0)) {
    throw InvalidArgument("process noise must be >= 0");
  }
  if (!(com_blend >= 0.0 && com_blend < 1.0)) throw InvalidArgument("com_blend must lie in [0, 1)");
  if (!(limits.tau1_max > 0.0 && limits.tau2_max > 0.0)) {
    throw InvalidArgument("torque limits must be positive");
  }
}

void apply_setting(Scenario& sc, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  auto d = [&] { return to_double(key, v); };
  if (key == "masses.m0") sc.body.m0 = d();
  else if (key == "masses.m1") sc.body.m1 = d();
  else if (key == "masses.m2") sc.body.m2 = d();
  else if (key == "lengths.l0") sc.body.l0 = d();
  else if (key == "lengths.l1") sc.body.l1 = d();
  else if (key == "lengths.l2") sc.body.l2 = d();
  else if (key == "log.radius") sc.body.r = d();
  else if (key == "gravity") sc.body.g = d();
  else if (key == "initial_com_offset") {
    sc.initial_com_offset = d();
    sc.initial_state.reset();
  }
  else if (key == "initial.theta") initial(sc).theta = d();
  else if (key == "initial.alpha") initial(sc).alpha = d();
  else if (key == "initial.beta") initial(sc).beta = d();
  else if (key == "initial.dtheta") initial(sc).dtheta = d();
  else if (key == "initial.dalpha") initial(sc).dalpha = d();
  else if (key == "initial.dbeta") initial(sc).dbeta = d();
  else if (key == "duration") sc.duration = d();
  else if (key == "dt_control") sc.policy.dt_control = d();
  else if (key == "dt_physics") sc.policy.dt_physics_nominal = d();
  else if (key == "dt_fine") sc.policy.dt_physics_fine = d();
  else if (key == "fine_trigger_com") sc.policy.fine_trigger_com = d();
  else if (key == "thresholds.com_small") sc.thresholds.com_small = d();
  else if (key == "thresholds.beta_case1") sc.thresholds.beta_case1 = d();
  else if (key == "thresholds.beta_case2") sc.thresholds.beta_case2 = d();
  else if (key == "thresholds.beta_exit3") sc.thresholds.beta_exit3 = d();
  else if (key == "c2_offset") sc.thresholds.c2_offset = d();
  else if (key == "clip_limit") sc.thresholds.clip_limit = d();
  else if (key == "penalties.case1") sc.penalties.case1 = d();
  else if (key == "penalties.case2") sc.penalties.case2 = d();
  else if (key == "penalties.case3") sc.penalties.case3 = d();
  else if (key == "penalties.case2_rate") sc.penalties.case2_rate = d();
  else if (key == "hip.kp") sc.stiffness.kp = d();
  else if (key == "hip.kd") sc.stiffness.kd = d();
  else if (key == "pid.kp") sc.pid.kp = d();
  else if (key == "pid.ki") sc.pid.ki = d();
  else if (key == "pid.kd") sc.pid.kd = d();
  else if (key == "pid.imax") sc.pid.integral_limit = d();
  else if (key == "pid.umax") sc.pid.output_limit = d();
  else if (key == "limits.tau1") sc.limits.tau1_max = d();
  else if (key == "limits.tau2") sc.limits.tau2_max = d();
  else if (key == "switching") sc.switching = to_bool(key, v);
  else if (key == "com_blend") sc.com_blend = d();
  else if (key == "filter_com") sc.filter_com = to_bool(key, v);
  else if (key == "actuation") {
    if (v == "torque") sc.actuation = Actuation::Torque;
    else if (v == "muscle") sc.actuation = Actuation::Muscle;
    else throw ParseError("key 'actuation': expected torque or muscle, got '" + v + "'");
  }
  else if (key == "muscle.fmax") sc.muscle.f_max = d();
  else if (key == "muscle.arm_hip") sc.muscle.arm_hip = d();
  else if (key == "muscle.arm_ankle") sc.muscle.arm_ankle = d();
  else if (key == "muscle.q") sc.muscle.q_state = d();
  else if (key == "muscle.r") sc.muscle.r_input = d();
  else if (key == "noise.com") sc.sensor.std_com = d();
  else if (key == "noise.com_rate") sc.sensor.std_com_rate = d();
  else if (key == "noise.angle") sc.sensor.std_angle = d();
  else if (key == "noise.rate") sc.sensor.std_rate = d();
  else if (key == "process_noise") sc.process_noise = d();
  else if (key == "process_noise_rate") sc.process_noise_rate = d();
  else if (key == "filter_noise_floor") sc.filter_noise_floor = d();
  else if (key == "dropped_channel") {
    if (v == "none") {
      sc.sensor.dropped_channel.reset();
    } else {
      try {
        sc.sensor.dropped_channel = channel_index(v);
      } catch (const InvalidArgument&) {
        throw ParseError("key 'dropped_channel': unknown channel '" + v + "'");
      }
    }
  }
  else if (key == "seed") {
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
      throw ParseError("key 'seed': expected a nonnegative integer, got '" + v + "'");
    }
    sc.sensor.seed = std::stoull(v);
  }
  else if (key == "output") sc.output = v;
  else throw ParseError("unknown key '" + key + "'");
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
  Scenario sc;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    try {
      apply_setting(sc, key, line.substr(eq + 1));
    } catch (const ParseError& e) {
      throw ParseError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return sc;
}

Scenario read_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str(), path);
}

std::string format_scenario(const Scenario& sc) {
  std::ostringstream o;
  auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << '\n'; };
  kv("masses.m0", num(sc.body.m0));
  kv("masses.m1", num(sc.body.m1));
  kv("masses.m2", num(sc.body.m2));
  kv("lengths.l0", num(sc.body.l0));
  kv("lengths.l1", num(sc.body.l1));
  kv("lengths.l2", num(sc.body.l2));
  kv("log.radius", num(sc.body.r));
  kv("gravity", num(sc.body.g));
  if (sc.initial_state) {
    const State& s = *sc.initial_state;
    kv("initial.theta", num(s.theta));
    kv("initial.alpha", num(s.alpha));
    kv("initial.beta", num(s.beta));
    kv("initial.dtheta", num(s.dtheta));
    kv("initial.dalpha", num(s.dalpha));
    kv("initial.dbeta", num(s.dbeta));
  } else {
    kv("initial_com_offset", num(sc.initial_com_offset));
  }
  kv("duration", num(sc.duration));
  kv("dt_control", num(sc.policy.dt_control));
  kv("dt_physics", num(sc.policy.dt_physics_nominal));
  kv("dt_fine", num(sc.policy.dt_physics_fine));
  kv("fine_trigger_com", num(sc.policy.fine_trigger_com));
  kv("thresholds.com_small", num(sc.thresholds.com_small));
  kv("thresholds.beta_case1", num(sc.thresholds.beta_case1));
  kv("thresholds.beta_case2", num(sc.thresholds.beta_case2));
  kv("thresholds.beta_exit3", num(sc.thresholds.beta_exit3));
  kv("c2_offset", num(sc.thresholds.c2_offset));
  kv("clip_limit", num(sc.thresholds.clip_limit));
  kv("penalties.case1", num(sc.penalties.case1));
  kv("penalties.case2", num(sc.penalties.case2));
  kv("penalties.case3", num(sc.penalties.case3));
  kv("penalties.case2_rate", num(sc.penalties.case2_rate));
  kv("hip.kp", num(sc.stiffness.kp));
  kv("hip.kd", num(sc.stiffness.kd));
  kv("pid.kp", num(sc.pid.kp));
  kv("pid.ki", num(sc.pid.ki));
  kv("pid.kd", num(sc.pid.kd));
  kv("pid.imax", num(sc.pid.integral_limit));
  kv("pid.umax", num(sc.pid.output_limit));
  kv("limits.tau1", num(sc.limits.tau1_max));
  kv("limits.tau2", num(sc.limits.tau2_max));
  kv("switching", sc.switching ? "true" : "false");
  kv("com_blend", num(sc.com_blend));
  kv("filter_com", sc.filter_com ? "true" : "false");
  kv("actuation", sc.actuation == Actuation::Torque ? "torque" : "muscle");
  kv("muscle.fmax", num(sc.muscle.f_max));
  kv("muscle.arm_hip", num(sc.muscle.arm_hip));
  kv("muscle.arm_ankle", num(sc.muscle.arm_ankle));
  kv("muscle.q", num(sc.muscle.q_state));
  kv("muscle.r", num(sc.muscle.r_input));
  kv("noise.com", num(sc.sensor.std_com));
  kv("noise.com_rate", num(sc.sensor.std_com_rate));
  kv("noise.angle", num(sc.sensor.std_angle));
  kv("noise.rate", num(sc.sensor.std_rate));
  kv("process_noise", num(sc.process_noise));
  kv("process_noise_rate", num(sc.process_noise_rate));
  kv("filter_noise_floor", num(sc.filter_noise_floor));
  kv("dropped_channel", sc.sensor.dropped_channel ? channel_name(*sc.sensor.dropped_channel) : "none");
  kv("seed", std::to_string(sc.sensor.seed));
  kv("output", sc.output);
  return o.str();
}

void write_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write scenario file '" + path + "'");
  f << format_scenario(sc);
  if (!f) throw ParseError("write failed for '" + path + "'");
}

}  // namespace logbal
