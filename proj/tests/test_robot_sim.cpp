#include <doctest.h>

#include <cmath>
#include <random>

#include "sgl/errors.hpp"
#include "sgl/simulator.hpp"

using namespace sgl;

TEST_CASE("build_robot derives masses from density and dimensions") {
  const RobotModel model = build_robot(RobotConfig{});
  // 600 kg/m^3 * 0.35 m * 0.10 m * 0.05 m = 1.05 kg per module.
  CHECK(model.link_mass() == doctest::Approx(1.05).epsilon(1e-12));
  CHECK(model.total_mass() == doctest::Approx(9.45).epsilon(1e-12));
  CHECK(model.num_joints() == 8);
  CHECK(model.config().max_torque() == doctest::Approx(3.5));
  CHECK(model.config().substeps_per_control() == 10);
}

TEST_CASE("minimal two-module chain") {
  RobotConfig cfg;
  cfg.num_modules = 2;
  const RobotModel model = build_robot(cfg);
  CHECK(model.num_links() == 2);
  CHECK(model.num_joints() == 1);
  SimState s = reset(model);
  CHECK(s.joint_angles.size() == 1);
  CHECK(s.link_positions.size() == 2);
}

TEST_CASE("invalid configurations name the field") {
  RobotConfig cfg;
  cfg.density = 0.0;
  try {
    build_robot(cfg);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "density");
  }
  cfg = RobotConfig{};
  cfg.num_modules = 1;
  CHECK_THROWS_AS(build_robot(cfg), ValidationError);
  cfg = RobotConfig{};
  cfg.control_dt = 0.0523;
  CHECK_THROWS_AS(build_robot(cfg), ValidationError);
  cfg = RobotConfig{};
  cfg.module_length = 0.4;
  CHECK_THROWS_AS(build_robot(cfg), ValidationError);  // gear no longer half length
}

TEST_CASE("robot config round-trips through the key-value format") {
  RobotConfig cfg;
  cfg.servo_kp = 75.25;
  cfg.lateral_friction_coeff = 12.5;
  const RobotConfig back = RobotConfig::from_kv(KeyValueConfig::parse(cfg.to_kv().to_string()));
  CHECK(back.servo_kp == 75.25);
  CHECK(back.lateral_friction_coeff == 12.5);
  CHECK(back.num_modules == 9);
  CHECK_THROWS_AS(RobotConfig::from_kv(KeyValueConfig::parse("mystery = 1\n")), ValidationError);
}

TEST_CASE("reset poses") {
  const RobotModel model = build_robot(RobotConfig{});
  const SimState straight = reset(model);
  for (double q : straight.joint_angles) CHECK(q == 0.0);
  for (double h : straight.link_headings) CHECK(h == straight.link_headings.front());
  CHECK(straight.sim_time == 0.0);
  CHECK(linear_momentum(model, straight).norm() == 0.0);

  const SimState zeros = reset(model, std::vector<double>(8, 0.0));
  CHECK(zeros == straight);

  std::vector<double> bad(8, 0.0);
  bad[3] = 2.0;
  CHECK_THROWS_AS(reset(model, bad), ValidationError);

  const SimState bent = reset(model, std::vector<double>{0.3, -0.2, 0.5, 1.2, -1.5, 0.0, 0.1, -0.7});
  CHECK(kinematic_residual(model, bent) < 1e-12);
  // The chain centre of mass sits at the origin.
  Vec2 com = Vec2::Zero();
  for (const Vec2& p : bent.link_positions) com += p / 9.0;
  CHECK(com.norm() < 1e-12);
}

TEST_CASE("servo torque law") {
  RobotConfig cfg;
  CHECK(servo_torque(0.4, 0.4, 0.0, cfg) == 0.0);
  CHECK(servo_torque(1.5, -1.5, 0.0, cfg) == 3.5);
  CHECK(servo_torque(-1.5, 1.5, 0.0, cfg) == -3.5);
  cfg.servo_kp = 100.0;
  cfg.servo_kd = 10.0;
  // 100 * 0.1 - 10 * 0 = 10 N*m before clamping.
  CHECK(servo_torque(0.1, 0.0, 0.0, cfg) == 3.5);
  CHECK(servo_torque(0.01, 0.0, 0.05, cfg) == doctest::Approx(0.5));
}

TEST_CASE("anisotropic wheel friction") {
  const RobotConfig cfg;
  CHECK(friction_force(Vec2::Zero(), 0.3, cfg).norm() == 0.0);
  const double heading = 0.7;
  const Vec2 t(std::cos(heading), std::sin(heading));
  const Vec2 n(-t.y(), t.x());
  const Vec2 along = friction_force(t, heading, cfg);
  CHECK(along.norm() == doctest::Approx(0.3));
  CHECK(along.dot(t) < 0.0);
  const Vec2 across = friction_force(n, heading, cfg);
  CHECK(across.norm() == doctest::Approx(30.0));
  CHECK(across.dot(n) < 0.0);
}

TEST_CASE("straight pose with zero targets is an equilibrium") {
  const RobotModel model = build_robot(RobotConfig{});
  Simulator sim(model);
  SimState s = reset(model);
  const SimState start = s;
  const std::vector<double> zero(8, 0.0);
  for (int i = 0; i < 20; ++i) {
    const StepInfo info = sim.step(s, zero);
    CHECK(info.instantaneous_power == 0.0);
  }
  CHECK(s.sim_time == doctest::Approx(1.0));
  SimState expect = start;
  expect.sim_time = s.sim_time;
  CHECK(s == expect);
}

TEST_CASE("holding a bent pose from rest stays put") {
  const RobotModel model = build_robot(RobotConfig{});
  Simulator sim(model);
  const std::vector<double> pose{0.3, -0.2, 0.5, 1.2, -1.5, 0.0, 0.1, -0.7};
  SimState s = reset(model, pose);
  const SimState start = s;
  for (int i = 0; i < 10; ++i) sim.step(s, pose);
  SimState expect = start;
  expect.sim_time = s.sim_time;
  CHECK(s == expect);
}

TEST_CASE("momentum is conserved without friction") {
  RobotConfig cfg;
  cfg.lateral_friction_coeff = 0.0;
  cfg.forward_damping_coeff = 0.0;
  const RobotModel model = build_robot(cfg);
  Simulator sim(model);
  SimState s = reset(model);
  sim.apply_impulse(s, 0, Vec2(0.05, 0.2));
  const Vec2 p0 = linear_momentum(model, s);
  CHECK(p0.x() == doctest::Approx(0.05));
  CHECK(p0.y() == doctest::Approx(0.2));
  const std::vector<double> zero(8, 0.0);
  for (int i = 0; i < 50; ++i) {
    sim.step(s, zero);
    CHECK((linear_momentum(model, s) - p0).norm() < 1e-8);
  }
  // The nudge bends the body; the servos fight back.
  double bend = 0.0;
  for (double q : s.joint_angles) bend += std::abs(q);
  CHECK(bend > 1e-4);
}

TEST_CASE("lateral sliding decays much faster than tangential sliding") {
  const RobotModel model = build_robot(RobotConfig{});
  Simulator sim(model);
  const std::vector<double> zero(8, 0.0);
  auto decay_rate = [&](const Vec2& v0) {
    SimState s = reset(model);
    s.com_velocity = v0;
    sim.update_links(s);
    sim.step(s, zero);
    return std::log(v0.norm() / s.com_velocity.norm()) / model.config().control_dt;
  };
  const double axial = decay_rate(Vec2(0.5, 0.0));
  const double lateral = decay_rate(Vec2(0.0, 0.5));
  CHECK(lateral > 50.0 * axial);
}

TEST_CASE("replay is bit-exact and torques never exceed the servo limit") {
  const RobotModel model = build_robot(RobotConfig{});
  const double limit = model.config().max_torque();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> target(-M_PI / 2, M_PI / 2);
  std::vector<std::vector<double>> script(300, std::vector<double>(8));
  for (auto& row : script)
    for (double& t : row) t = target(rng);

  auto run = [&] {
    Simulator sim(model);
    SimState s = reset(model);
    for (const auto& row : script) {
      const StepInfo info = sim.step(s, row);
      for (int j = 0; j < 8; ++j) {
        REQUIRE(std::abs(s.applied_torques[j]) <= limit);
        REQUIRE(std::abs(info.torques[j]) <= limit);
        REQUIRE(std::abs(s.joint_angles[j]) <= model.config().joint_limit);
      }
      REQUIRE(kinematic_residual(model, s) < 1e-9);
    }
    return s;
  };
  const SimState a = run();
  const SimState b = run();
  CHECK(a == b);
}

TEST_CASE("step info power matches the torque-velocity identity") {
  const RobotModel model = build_robot(RobotConfig{});
  Simulator sim(model);
  SimState s = reset(model);
  const std::vector<double> targets{0.5, -0.5, 0.5, -0.5, 0.5, -0.5, 0.5, -0.5};
  const StepInfo info = sim.step(s, targets);
  double p = 0.0;
  for (int j = 0; j < 8; ++j) p += std::abs(info.torques[j] * info.joint_velocities[j]);
  CHECK(info.instantaneous_power == p);
  CHECK(info.head_velocity == s.link_velocities[0].norm());
}

TEST_CASE("targets outside joint limits are rejected") {
  const RobotModel model = build_robot(RobotConfig{});
  Simulator sim(model);
  SimState s = reset(model);
  std::vector<double> t(8, 0.0);
  t[0] = 2.0;
  CHECK_THROWS_AS(sim.step(s, t), ValidationError);
  CHECK_THROWS_AS(sim.step(s, std::vector<double>(7, 0.0)), ValidationError);
}
