#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "flightcore/dynamics/quad_dynamics.hpp"
#include "flightcore/errors.hpp"

namespace flightcore {
namespace {

constexpr double kG = 9.81;

QuadState hover() { return hover_state(Vec3(0.0, 0.0, 5.0), QuadParams{}.hover_thrust_per_rotor()); }

TEST(Mix, EqualThrustsGiveNoTorque) {
  const Wrench w = mix(Vec4(2, 2, 2, 2), QuadParams{});
  EXPECT_EQ(w.eta, Vec3::Zero());
  EXPECT_DOUBLE_EQ(w.c, 8.0);
}

TEST(Mix, AsymmetricThrustsHandEvaluated) {
  const Wrench w = mix(Vec4(1, 2, 3, 4), QuadParams{});
  EXPECT_NEAR(w.eta.x(), 0.0, 1e-15);
  EXPECT_NEAR(w.eta.y(), 4.0 * 0.17 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(w.eta.y(), 0.480833, 5e-7);
  EXPECT_NEAR(w.eta.z(), -0.032, 1e-15);
  EXPECT_DOUBLE_EQ(w.c, 10.0);
}

TEST(Mix, ZeroThrust) {
  const Wrench w = mix(Vec4::Zero(), QuadParams{});
  EXPECT_EQ(w.eta, Vec3::Zero());
  EXPECT_EQ(w.c, 0.0);
}

TEST(Unmix, HoverAllocation) {
  const Vec4 f = unmix(kG, Vec3::Zero(), QuadParams{});
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(f[i], 2.4525, 1e-15);
  EXPECT_EQ(unmix(0.0, Vec3::Zero(), QuadParams{}), Vec4::Zero());
}

TEST(Unmix, RoundTripOfExample) {
  const QuadParams p;
  const Wrench w = mix(Vec4(1, 2, 3, 4), p);
  const Vec4 f = unmix(w.c, w.eta, p);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(f[i], i + 1.0, 1e-12);
}

TEST(Unmix, InverseInBothDirectionsOnRandomInputs) {
  const QuadParams p;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 2000; ++k) {
    const Vec4 f(u(rng), u(rng), u(rng), u(rng));
    const Wrench w = mix(f, p);
    const Vec4 back = unmix(w.c, w.eta, p);
    EXPECT_LE((back - f).norm(), 1e-12 * std::max(1.0, f.norm()));

    const double c = u(rng);
    const Vec3 eta(0.1 * u(rng), 0.1 * u(rng), 0.01 * u(rng));
    const Wrench again = mix(unmix(c, eta, p), p);
    EXPECT_NEAR(again.c, c, 1e-12 * std::max(1.0, std::abs(c)));
    EXPECT_LE((again.eta - eta).norm(), 1e-12 * std::max(1.0, eta.norm()));
  }
}

TEST(Unmix, SingularAllocationIsAConfigurationError) {
  QuadParams p;
  p.kappa = 0.0;
  EXPECT_THROW(unmix(1.0, Vec3::Zero(), p), ConfigurationError);
}

TEST(Derivative, HoverIsAnEquilibrium) {
  const QuadState s = hover();
  const StateDerivative d = derivative(s, QuadParams{}, s.f);
  EXPECT_EQ(d.dp, Vec3::Zero());
  EXPECT_NEAR(d.dv.norm(), 0.0, 1e-15);
  EXPECT_EQ(d.dq, Vec4::Zero());
  EXPECT_EQ(d.domega, Vec3::Zero());
  EXPECT_EQ(d.df, Vec4::Zero());
}

TEST(Derivative, FreeFall) {
  QuadState s;
  const StateDerivative d = derivative(s, QuadParams{}, Vec4::Zero());
  EXPECT_EQ(d.dv, Vec3(0.0, 0.0, -kG));
}

TEST(Derivative, LinearRotorDrag) {
  QuadParams p;
  p.drag = Vec3(0.5, 0.0, 0.0);
  QuadState s;
  s.v = Vec3(2.0, 0.0, 0.0);
  const StateDerivative d = derivative(s, p, Vec4::Zero());
  EXPECT_DOUBLE_EQ(d.dv.x(), -1.0);
  EXPECT_DOUBLE_EQ(d.dv.z(), -kG);
}

TEST(Derivative, MotorLagIsFirstOrder) {
  QuadState s;
  const QuadParams p;
  const StateDerivative d = derivative(s, p, Vec4(1, 2, 3, 4));
  EXPECT_EQ(d.df, Vec4(1, 2, 3, 4) / p.motor_tau);
}

TEST(Derivative, IsotropicInertiaHasNoGyroscopicTerm) {
  QuadParams p;
  p.inertia = Vec3::Constant(0.003);
  QuadState s;
  s.omega = Vec3(1.3, -0.7, 2.1);
  s.f = Vec4::Constant(2.0);
  const StateDerivative d = derivative(s, p, s.f);
  EXPECT_LT(d.domega.norm(), 1e-12);
}

TEST(Derivative, QuaternionRateMatchesHamiltonProduct) {
  QuadState s;
  s.q = quat_from_euler_zyx(Vec3(0.3, -0.2, 1.1));
  s.omega = Vec3(0.4, -1.2, 0.7);
  const StateDerivative d = derivative(s, QuadParams{}, Vec4::Zero());
  const Quat expected = s.q * Quat(0.0, s.omega.x(), s.omega.y(), s.omega.z());
  EXPECT_NEAR(d.dq[0], 0.5 * expected.w(), 1e-15);
  EXPECT_NEAR(d.dq[1], 0.5 * expected.x(), 1e-15);
  EXPECT_NEAR(d.dq[2], 0.5 * expected.y(), 1e-15);
  EXPECT_NEAR(d.dq[3], 0.5 * expected.z(), 1e-15);
}

TEST(Derivative, RejectsBadInputs) {
  QuadState s;
  s.p.x() = std::nan("");
  EXPECT_THROW(derivative(s, QuadParams{}, Vec4::Zero()), ContractViolation);

  QuadState t;
  t.q = Quat(1.1, 0.0, 0.0, 0.0);
  EXPECT_THROW(derivative(t, QuadParams{}, Vec4::Zero()), ContractViolation);

  QuadParams bad;
  bad.mass = 0.0;
  EXPECT_THROW(derivative(QuadState{}, bad, Vec4::Zero()), ContractViolation);
}

TEST(Derivative, IsBitwiseRepeatable) {
  QuadState s;
  s.q = quat_from_euler_zyx(Vec3(0.1, 0.2, 0.3));
  s.omega = Vec3(1, 2, 3);
  s.v = Vec3(-1, 0.5, 2);
  s.f = Vec4(1, 2, 3, 4);
  QuadParams p;
  p.drag = Vec3(0.3, 0.2, 0.1);
  const StateDerivative a = derivative(s, p, Vec4(4, 3, 2, 1));
  const StateDerivative b = derivative(s, p, Vec4(4, 3, 2, 1));
  EXPECT_EQ(a.dv, b.dv);
  EXPECT_EQ(a.dq, b.dq);
  EXPECT_EQ(a.domega, b.domega);
}

TEST(Step, HoverHoldsForAnEpisode) {
  for (const Integrator m : {Integrator::Euler, Integrator::RK4}) {
    QuadState s = hover();
    const Vec3 p0 = s.p;
    for (int i = 0; i < 250; ++i) s = step(s, QuadParams{}, s.f, 0.02, m);
    EXPECT_LT((s.p - p0).norm(), 1e-9);
    EXPECT_LT(std::abs(s.q.norm() - 1.0), 1e-9);
    EXPECT_NEAR(s.t, 5.0, 1e-12);
  }
}

TEST(Step, ZeroRateLeavesAttitudeUnchanged) {
  QuadState s = hover();
  s.q = quat_from_euler_zyx(Vec3(0.2, -0.1, 0.7));
  const Quat q0 = s.q;
  for (int i = 0; i < 100; ++i) s = step(s, QuadParams{}, Vec4::Constant(2.0), 0.02, Integrator::RK4);
  EXPECT_EQ(s.q.coeffs(), q0.coeffs());
}

TEST(Step, BallisticMatchesClosedForm) {
  QuadState s;
  s.p = Vec3(0.0, 0.0, 10.0);
  s.v = Vec3(0.0, 0.0, 3.0);
  for (int i = 1; i <= 50; ++i) {
    s = step(s, QuadParams{}, Vec4::Zero(), 0.02, Integrator::RK4);
    const double t = 0.02 * i;
    EXPECT_NEAR(s.p.z(), 10.0 + 3.0 * t - 0.5 * kG * t * t, 1e-10);
  }
}

TEST(Step, NormalizesQuaternionAndClampsThrust) {
  QuadState s;
  s.omega = Vec3(1.0, -1.0, 0.5);
  s.f = Vec4(0.0, 8.0, 0.0, 8.0);
  const QuadParams p;
  for (int i = 0; i < 50; ++i) {
    s = step(s, p, Vec4(-5.0, 20.0, -1.0, 100.0), 0.02, Integrator::RK4);
    EXPECT_LT(std::abs(s.q.norm() - 1.0), 1e-9);
    EXPECT_GE(s.f.minCoeff(), p.thrust_min);
    EXPECT_LE(s.f.maxCoeff(), p.thrust_max);
    ASSERT_TRUE(s.all_finite());
  }
}

TEST(Step, RejectsNonPositiveStep) {
  EXPECT_THROW(step(QuadState{}, QuadParams{}, Vec4::Zero(), 0.0, Integrator::RK4), ArgumentError);
  EXPECT_THROW(step(QuadState{}, QuadParams{}, Vec4::Zero(), -0.1, Integrator::Euler), ArgumentError);
}

TEST(Integrator, ParsesNames) {
  EXPECT_EQ(parse_integrator("rk4"), Integrator::RK4);
  EXPECT_EQ(parse_integrator("Euler"), Integrator::Euler);
  EXPECT_THROW(parse_integrator("midpoint"), ArgumentError);
}

TEST(EulerAngles, RoundTrip) {
  const Vec3 rpy(0.3, -0.4, 2.5);
  EXPECT_LT((euler_zyx(quat_from_euler_zyx(rpy)) - rpy).norm(), 1e-12);
}

TEST(StateHash, ChangesWithState) {
  QuadState a, b;
  b.v.x() = 1e-300;
  EXPECT_NE(state_hash(a), state_hash(b));
  EXPECT_EQ(state_hash(a), state_hash(QuadState{}));
}

}  // namespace
}  // namespace flightcore
