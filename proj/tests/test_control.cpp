#include <gtest/gtest.h>

#include <random>

#include "flightcore/control/rate_controller.hpp"
#include "flightcore/dynamics/quad_dynamics.hpp"
#include "flightcore/errors.hpp"

namespace flightcore {
namespace {

TEST(RateController, ZeroErrorGivesHoverAllocation) {
  const Vec4 f = bodyrate_to_thrusts(BodyRateCmd{9.81, Vec3::Zero()}, QuadState{}, QuadParams{}, RateGains{});
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(f[i], 2.4525, 1e-15);
}

TEST(RateController, RollRateStepHandEvaluated) {
  const QuadParams p;
  RateGains gains;
  gains.kp = Vec3(20.0, 20.0, 8.0);
  const BodyRateCmd cmd{9.81, Vec3(1.0, 0.0, 0.0)};
  const Vec4 f = bodyrate_to_thrusts(cmd, QuadState{}, p, gains);
  const Vec4 expected = unmix(9.81, Vec3(0.05, 0.0, 0.0), p);
  EXPECT_LT((f - expected).norm(), 1e-15);
  EXPECT_NEAR(mix(f, p).eta.x(), 0.05, 1e-15);
}

TEST(RateController, SaturatesAtThrustLimit) {
  const QuadParams p;
  const Vec4 f = bodyrate_to_thrusts(BodyRateCmd{1e6, Vec3::Zero()}, QuadState{}, p, RateGains{});
  EXPECT_EQ(f, Vec4::Constant(p.thrust_max));
}

TEST(RateController, OutputAlwaysWithinLimits) {
  const QuadParams p;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int k = 0; k < 5000; ++k) {
    QuadState s;
    s.omega = Vec3(u(rng), u(rng), u(rng));
    const BodyRateCmd cmd{std::abs(u(rng)), Vec3(u(rng), u(rng), u(rng))};
    const Vec4 f = bodyrate_to_thrusts(cmd, s, p, RateGains{});
    EXPECT_GE(f.minCoeff(), p.thrust_min);
    EXPECT_LE(f.maxCoeff(), p.thrust_max);
  }
}

TEST(RateController, ClosedLoopDecaysMonotonically) {
  const QuadParams p;
  const RateGains gains;
  QuadState s = hover_state(Vec3(0, 0, 5), p.hover_thrust_per_rotor());
  s.omega = Vec3(2.0, 2.0, 2.0);
  const BodyRateCmd cmd{p.gravity, Vec3::Zero()};
  double prev = s.omega.norm();
  int settled_at = -1;
  for (int i = 1; i <= 500; ++i) {
    s = step(s, p, bodyrate_to_thrusts(cmd, s, p, gains), 0.002, Integrator::RK4);
    const double n = s.omega.norm();
    if (i > 10) {
      EXPECT_LE(n, prev) << "step " << i;
    }
    if (settled_at < 0 && n < 0.05) settled_at = i;
    prev = n;
  }
  ASSERT_GT(settled_at, 0);
  EXPECT_LE(settled_at * 0.002, 1.0);
}

TEST(RateController, ThrustSetpointClampsRotorCommands) {
  const QuadParams p;
  const Vec4 f = thrust_setpoint(RotorThrustCmd{Vec4(-1.0, 3.0, 9.0, 4.0)}, QuadState{}, p, RateGains{});
  EXPECT_EQ(f, Vec4(0.0, 3.0, 8.0, 4.0));
}

TEST(RateGains, RejectNonPositive) {
  RateGains g;
  g.kp.y() = 0.0;
  EXPECT_THROW(g.validate(), ContractViolation);
}

}  // namespace
}  // namespace flightcore
