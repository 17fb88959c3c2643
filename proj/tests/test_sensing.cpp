#include <gtest/gtest.h>

#include <cmath>

#include "flightcore/dynamics/quad_dynamics.hpp"
#include "flightcore/errors.hpp"
#include "flightcore/sensing/imu.hpp"

namespace flightcore {
namespace {

ImuReading measure(const QuadState& s, const StateDerivative& d, const ImuNoiseModel& noise,
                   std::uint64_t seed = 1) {
  RngStream rng(seed);
  return imu_measure(s, d, QuadParams{}, noise, rng);
}

TEST(Imu, HoverReadsGravityReaction) {
  const QuadParams p;
  const QuadState s = hover_state(Vec3(0, 0, 5), p.hover_thrust_per_rotor());
  const ImuReading r = measure(s, derivative(s, p, s.f), ImuNoiseModel{});
  EXPECT_NEAR((r.accel - Vec3(0, 0, 9.81)).norm(), 0.0, 1e-14);
  EXPECT_EQ(r.gyro, Vec3::Zero());
}

TEST(Imu, FreeFallReadsZero) {
  const QuadState s;
  const ImuReading r = measure(s, derivative(s, QuadParams{}, Vec4::Zero()), ImuNoiseModel{});
  EXPECT_EQ(r.accel, Vec3::Zero());
}

TEST(Imu, SpecificForceFromGivenDerivative) {
  StateDerivative d;
  d.dv = Vec3(1.0, 0.0, 0.0);
  const ImuReading r = measure(QuadState{}, d, ImuNoiseModel{});
  EXPECT_EQ(r.accel, Vec3(1.0, 0.0, 9.81));
}

TEST(Imu, RotatesIntoBodyFrame) {
  QuadState s;
  s.q = quat_from_euler_zyx(Vec3(0.0, 0.0, M_PI / 2));
  StateDerivative d;
  d.dv = Vec3(1.0, 0.0, -9.81);
  const ImuReading r = measure(s, d, ImuNoiseModel{});
  EXPECT_NEAR((r.accel - Vec3(0.0, -1.0, 0.0)).norm(), 0.0, 1e-15);
}

TEST(Imu, BiasIsAdded) {
  ImuNoiseModel noise;
  noise.accel_bias = Vec3(0.1, 0.2, 0.3);
  noise.gyro_bias = Vec3(-0.01, 0.0, 0.01);
  QuadState s;
  s.omega = Vec3(1, 2, 3);
  const ImuReading r = measure(s, StateDerivative{}, noise);
  EXPECT_EQ(r.accel, Vec3(0.1, 0.2, 9.81 + 0.3));
  EXPECT_EQ(r.gyro, Vec3(1 - 0.01, 2, 3 + 0.01));
}

TEST(Imu, NoiseFreeModelDoesNotConsumeTheStream) {
  RngStream a(3), b(3);
  imu_measure(QuadState{}, StateDerivative{}, QuadParams{}, ImuNoiseModel{}, a);
  EXPECT_EQ(a(), b());
}

TEST(Imu, NoiseMeanConvergesAndIsReproducible) {
  ImuNoiseModel noise;
  noise.accel_noise_std = 0.5;
  noise.gyro_noise_std = 0.1;
  constexpr int kSamples = 100000;
  RngStream rng(17), again(17);
  Vec3 accel_sum = Vec3::Zero(), gyro_sum = Vec3::Zero();
  for (int i = 0; i < kSamples; ++i) {
    const ImuReading r = imu_measure(QuadState{}, StateDerivative{}, QuadParams{}, noise, rng);
    const ImuReading r2 = imu_measure(QuadState{}, StateDerivative{}, QuadParams{}, noise, again);
    ASSERT_EQ(r.accel, r2.accel);
    accel_sum += r.accel;
    gyro_sum += r.gyro;
  }
  const Vec3 accel_mean = accel_sum / kSamples;
  const Vec3 gyro_mean = gyro_sum / kSamples;
  const double accel_tol = 4.0 * 0.5 / std::sqrt(double(kSamples));
  const double gyro_tol = 4.0 * 0.1 / std::sqrt(double(kSamples));
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(accel_mean[k], k == 2 ? 9.81 : 0.0, accel_tol);
    EXPECT_NEAR(gyro_mean[k], 0.0, gyro_tol);
  }
}

TEST(Imu, RejectsNegativeStd) {
  ImuNoiseModel noise;
  noise.gyro_noise_std = -1.0;
  EXPECT_THROW(noise.validate(), ContractViolation);
}

}  // namespace
}  // namespace flightcore
