#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"

#include "logbal/errors.hpp"
#include "logbal/scenario.hpp"

using namespace logbal;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text, "t.cfg");
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("a single key leaves everything else at its default") {
  const Scenario sc = parse_scenario("initial_com_offset = 0.08\n");
  Scenario expect;
  expect.initial_com_offset = 0.08;
  CHECK(sc == expect);
  CHECK(sc.body.m1 == 42.0);
  CHECK(sc.sensor.std_angle == 0.0);
  CHECK_FALSE(sc.initial_state.has_value());
}

TEST_CASE("comments, blanks and whitespace") {
  const Scenario sc = parse_scenario("# header\n\n  masses.m2 =  25   # heavier torso\nseed=42\n");
  CHECK(sc.body.m2 == 25.0);
  CHECK(sc.sensor.seed == 42u);
}

TEST_CASE("enumerated values") {
  const Scenario sc = parse_scenario(
      "actuation = muscle\ndropped_channel = dbeta\nswitching = false\n");
  CHECK(sc.actuation == Actuation::Muscle);
  REQUIRE(sc.sensor.dropped_channel.has_value());
  CHECK(*sc.sensor.dropped_channel == 5);
  CHECK_FALSE(sc.switching);
  CHECK_FALSE(parse_scenario("dropped_channel = none\n").sensor.dropped_channel.has_value());
}

TEST_CASE("initial state keys build a full state") {
  const Scenario sc = parse_scenario("initial.alpha = 0.1\ninitial.dbeta = -0.2\n");
  REQUIRE(sc.initial_state.has_value());
  CHECK(sc.initial_state->alpha == 0.1);
  CHECK(sc.initial_state->dbeta == -0.2);
  CHECK(sc.initial_state->theta == 0.0);
}

TEST_CASE("format and parse round trip") {
  Scenario sc;
  sc.body.m0 = 7.123456789012345;
  sc.body.l2 = 0.1 + 0.2;
  sc.initial_com_offset = -0.0412345678901234;
  sc.duration = 12.5;
  sc.actuation = Actuation::Muscle;
  sc.sensor.std_com = 0.01;
  sc.sensor.dropped_channel = 1;
  sc.sensor.seed = 12345678901234567ULL;
  sc.penalties.case2 = 3.3e8;
  sc.switching = false;
  sc.filter_com = false;
  sc.output = "out/run.csv";
  CHECK(parse_scenario(format_scenario(sc)) == sc);

  Scenario with_state;
  with_state.initial_state = State{0.01, 0.02, -0.3, 0.4, 0.5, 0.6};
  CHECK(parse_scenario(format_scenario(with_state)) == with_state);
}

TEST_CASE("write and read back a file") {
  const auto path = std::filesystem::temp_directory_path() / "logbal_scenario_test.cfg";
  Scenario sc;
  sc.initial_com_offset = 0.05;
  sc.pid.kd = 9.5;
  write_scenario(sc, path.string());
  CHECK(read_scenario(path.string()) == sc);
  std::filesystem::remove(path);
}

TEST_CASE("errors name the line and key") {
  const std::string unknown = error_of("duration = 3\nbogus.key = 1\n");
  CHECK(unknown.find("t.cfg:2") != std::string::npos);
  CHECK(unknown.find("bogus.key") != std::string::npos);

  const std::string bad = error_of("\n\nmasses.m0 = heavy\n");
  CHECK(bad.find("t.cfg:3") != std::string::npos);
  CHECK(bad.find("masses.m0") != std::string::npos);

  CHECK(error_of("duration 3\n").find("t.cfg:1") != std::string::npos);
  CHECK(error_of("seed = -4\n").find("seed") != std::string::npos);
  CHECK(error_of("actuation = hydraulic\n").find("actuation") != std::string::npos);
  CHECK(error_of("dropped_channel = gamma\n").find("gamma") != std::string::npos);
  CHECK(error_of("switching = maybe\n").find("switching") != std::string::npos);
  CHECK(error_of("duration = 3x\n").find("duration") != std::string::npos);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(read_scenario("/nonexistent/dir/x.cfg"), ParseError);
}

TEST_CASE("apply_setting overrides one key") {
  Scenario sc;
  apply_setting(sc, "pid.kp", "150");
  CHECK(sc.pid.kp == 150.0);
  CHECK_THROWS_AS(apply_setting(sc, "nope", "1"), ParseError);
}

TEST_CASE("validation") {
  Scenario sc;
  CHECK_NOTHROW(sc.validate());
  sc.initial_com_offset = 0.5;
  CHECK_THROWS_AS(sc.validate(), InvalidArgument);
  sc = Scenario{};
  sc.duration = -1.0;
  CHECK_THROWS_AS(sc.validate(), InvalidArgument);
  sc = Scenario{};
  sc.com_blend = 1.0;
  CHECK_THROWS_AS(sc.validate(), InvalidArgument);
  sc = Scenario{};
  sc.filter_noise_floor = -1e-3;
  CHECK_THROWS_AS(sc.validate(), InvalidArgument);
  sc = Scenario{};
  sc.policy.dt_physics_nominal = 0.003;
  CHECK_THROWS_AS(sc.validate(), InvalidArgument);
  // A full initial state bypasses the offset range check.
  sc = Scenario{};
  sc.initial_com_offset = 0.5;
  sc.initial_state = State{};
  CHECK_NOTHROW(sc.validate());
}
