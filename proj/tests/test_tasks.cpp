#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "flightcore/dynamics/quad_dynamics.hpp"
#include "flightcore/errors.hpp"
#include "flightcore/tasks/tasks.hpp"
#include "oracles.hpp"

namespace flightcore {
namespace {

TaskFeatures at(const Vec3& p, const Vec3& theta = Vec3::Zero(), const Vec3& v = Vec3::Zero(),
                const Vec3& omega = Vec3::Zero()) {
  return {p, theta, v, omega};
}

TEST(Tasks, Dimensions) {
  EXPECT_EQ(TaskSpec::stabilize().observation_dim(), 10u);
  EXPECT_EQ(TaskSpec::motor_failure().observation_dim(), 12u);
  EXPECT_EQ(TaskSpec::gate_flight().observation_dim(), 18u);
  EXPECT_EQ(TaskSpec::stabilize().action_dim(), 4u);
  EXPECT_EQ(TaskSpec::motor_failure().action_dim(), 3u);
  EXPECT_EQ(TaskSpec::gate_flight().action_dim(), 4u);
}

TEST(Tasks, ParsesNames) {
  EXPECT_EQ(parse_task_kind("stabilize"), TaskKind::Stabilize);
  EXPECT_EQ(parse_task_kind("motor_failure"), TaskKind::MotorFailure);
  EXPECT_EQ(parse_task_kind("gate"), TaskKind::GateFlight);
  EXPECT_THROW(parse_task_kind("race"), ArgumentError);
}

TEST(Tasks, StabilizeRewardExamples) {
  const TaskSpec s = TaskSpec::stabilize();
  EXPECT_NEAR(reward_stabilize(at(s.p_target), s), 0.0, 1e-12);
  EXPECT_NEAR(reward_stabilize(at(s.p_target + Vec3(1, 0, 0)), s), -2e-3, 1e-12);
  EXPECT_NEAR(reward_stabilize(at(s.p_target, Vec3::Zero(), Vec3(0, 0, 10)), s), -2e-3, 1e-12);
  EXPECT_NEAR(reward_stabilize(at(s.p_target, Vec3(0, 0, 0.5)), s), -1e-3, 1e-12);
}

TEST(Tasks, MotorFailureRewardExamples) {
  const TaskSpec s = TaskSpec::motor_failure();
  EXPECT_NEAR(reward_motor_failure(at(s.p_target, Vec3::Zero(), Vec3::Zero(), Vec3(1, 1, 0)), s),
              -2e-4 * std::sqrt(2.0), 1e-12);
  for (const double yaw : {0.0, 1.0, -2.5}) {
    EXPECT_NEAR(reward_motor_failure(at(s.p_target, Vec3(0.1, 0, yaw)), s), -2e-4, 1e-12);
  }
}

TEST(Tasks, MotorFailureRewardIgnoresYaw) {
  const TaskSpec s = TaskSpec::motor_failure();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0), yaw(-M_PI, M_PI);
  for (int i = 0; i < 1000; ++i) {
    TaskFeatures x = at(Vec3(u(rng), u(rng), 5 + u(rng)), Vec3(u(rng), u(rng), yaw(rng)),
                        Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), 10 * u(rng)));
    const double r0 = reward_motor_failure(x, s);
    x.theta.z() = yaw(rng);
    x.omega.z() = 10 * u(rng);
    EXPECT_EQ(reward_motor_failure(x, s), r0);
  }
}

TEST(Tasks, GateRewardExamples) {
  const TaskSpec s = TaskSpec::gate_flight();
  TerminationFlags none, hit;
  hit.gate_hit = true;
  EXPECT_NEAR(reward_gate(at(s.p_target), s, none), 0.1, 1e-12);
  EXPECT_NEAR(reward_gate(at(s.p_target + Vec3(0, 1, 0)), s, none), 0.098, 1e-12);
  EXPECT_EQ(reward_gate(at(s.p_target), s, hit), -0.1);
  TerminationFlags ground;
  ground.ground_hit = true;
  EXPECT_EQ(reward(at(s.p_target), s, ground), -0.1);
}

TEST(Tasks, GateCrossingExamples) {
  const Gate g;
  EXPECT_EQ(classify_gate_crossing(g.position - Vec3(0.1, 0, 0), g.position + Vec3(0.1, 0, 0), g),
            GateCrossing::Pass);
  const Vec3 off(0, 1.5, 0);
  EXPECT_EQ(classify_gate_crossing(g.position + off - Vec3(0.1, 0, 0),
                                   g.position + off + Vec3(0.1, 0, 0), g),
            GateCrossing::Hit);
  const Vec3 far(0, 0, 4.5);
  EXPECT_EQ(classify_gate_crossing(g.position + far - Vec3(0.1, 0, 0),
                                   g.position + far + Vec3(0.1, 0, 0), g),
            GateCrossing::Outside);
  EXPECT_EQ(classify_gate_crossing(g.position - Vec3(0.3, 0, 0), g.position - Vec3(0.1, 0, 0), g),
            GateCrossing::None);
}

TEST(Tasks, GateCrossingMatchesOracle) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Gate g;
    g.position = Vec3(3 * u(rng), 3 * u(rng), 3 + u(rng));
    g.euler = Vec3(0.5 * u(rng), 0.5 * u(rng), M_PI * u(rng));
    const Vec3 a = g.position + Vec3(3 * u(rng), 3 * u(rng), 3 * u(rng));
    const Vec3 b = g.position + Vec3(3 * u(rng), 3 * u(rng), 3 * u(rng));
    EXPECT_EQ(classify_gate_crossing(a, b, g), oracle::gate_crossing(a, b, g)) << i;
  }
}

TEST(Tasks, TerminationRules) {
  TaskSpec s = TaskSpec::stabilize();
  QuadState st = hover_state(Vec3(0, 0, -3), 2.45);
  EXPECT_FALSE(check_termination(st, st, s, 1.0).terminal());
  EXPECT_TRUE(check_termination(st, st, s, 5.0).timeout);

  TaskSpec g = TaskSpec::gate_flight();
  QuadState prev = hover_state(g.gate.position - Vec3(0.05, 0, 0), 2.45);
  QuadState curr = hover_state(g.gate.position + Vec3(0.05, 0, 0), 2.45);
  const TerminationFlags pass = check_termination(curr, prev, g, 1.0);
  EXPECT_TRUE(pass.gate_pass);
  EXPECT_FALSE(pass.terminal());

  curr.p.z() = -0.01;
  prev.p.z() = 0.01;
  prev.p.x() = curr.p.x();
  const TerminationFlags ground = check_termination(curr, prev, g, 1.0);
  EXPECT_TRUE(ground.ground_hit);
  EXPECT_EQ(ground.reason(), "ground_hit");
}

TEST(Tasks, EpisodeLengthIs250Steps) {
  EXPECT_EQ(TaskSpec::stabilize().episode_steps(), 250u);
  EXPECT_EQ(TaskSpec::gate_flight().episode_steps(), 250u);
}

TEST(Tasks, ObservationLayouts) {
  TaskSpec s = TaskSpec::stabilize();
  QuadState st = hover_state(Vec3(1, 2, 3), 2.45);
  st.q = quat_from_euler_zyx(Vec3(0.1, -0.2, 0.3));
  st.v = Vec3(4, 5, 6);
  st.omega = Vec3(7, 8, 9);
  auto o = observe(st, s);
  EXPECT_EQ(o[0], 1.0);
  EXPECT_NEAR(o[3], 0.1, 1e-12);
  EXPECT_NEAR(o[5], 0.3, 1e-12);
  EXPECT_EQ(o[6], 4.0);
  EXPECT_EQ(o[9], 1.0);

  s.layout = AttitudeLayout::Quaternion;
  o = observe(st, s);
  EXPECT_EQ(o[3], st.q.w());
  EXPECT_EQ(o[6], st.q.z());
  EXPECT_EQ(o[9], 6.0);

  const auto m = observe(st, TaskSpec::motor_failure());
  EXPECT_EQ(m[9], 7.0);
  EXPECT_EQ(m[11], 9.0);

  const TaskSpec g = TaskSpec::gate_flight();
  const auto go = observe(st, g);
  EXPECT_EQ(go[12], g.gate.position.x());
  EXPECT_EQ(go[14], g.gate.position.z());
  EXPECT_EQ(go[17], g.gate.euler.z());

  std::vector<double> wrong(5);
  EXPECT_THROW(observe_into(st, s, wrong), ArgumentError);
}

TEST(Tasks, DecodesActions) {
  const std::vector<double> a4{-1.0, 0.1, 0.2, 0.3};
  const auto rate = std::get<BodyRateCmd>(decode_action(a4, TaskSpec::stabilize()));
  EXPECT_EQ(rate.c, 0.0);
  EXPECT_EQ(rate.omega_des, Vec3(0.1, 0.2, 0.3));

  TaskSpec mf = TaskSpec::motor_failure();
  const std::vector<double> a3{1.0, 2.0, 3.0};
  EXPECT_EQ(std::get<RotorThrustCmd>(decode_action(a3, mf)).f_des, Vec4(1, 2, 3, 0));
  mf.failed_rotor = 0;
  EXPECT_EQ(std::get<RotorThrustCmd>(decode_action(a3, mf)).f_des, Vec4(0, 1, 2, 3));

  const auto rotor = std::get<RotorThrustCmd>(decode_action(a4, TaskSpec::gate_flight()));
  EXPECT_EQ(rotor.f_des, Vec4(-1.0, 0.1, 0.2, 0.3));

  EXPECT_THROW(decode_action(a3, TaskSpec::stabilize()), ArgumentError);
}

TEST(Tasks, LoadsFromConfig) {
  KeyValueConfig cfg = KeyValueConfig::parse("task = motor_failure\nfailed_rotor = 1\n");
  const TaskSpec s = load_task_spec(cfg);
  EXPECT_EQ(s.kind, TaskKind::MotorFailure);
  EXPECT_EQ(s.failed_rotor, 0);
  EXPECT_THROW(load_task_spec(KeyValueConfig::parse("task = motor_failure\nfailed_rotor = 5\n")),
               ArgumentError);
}

TEST(Tasks, MotorFailureSampleStartsWithDeadRotor) {
  const TaskSpec s = TaskSpec::motor_failure();
  RngStream rng = derive_stream(1, 2);
  EXPECT_EQ(sample_task_state(s, QuadParams{}, rng).f[3], 0.0);
}

}  // namespace
}  // namespace flightcore
