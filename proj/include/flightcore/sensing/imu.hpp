#pragma once

#include "flightcore/dynamics/quad_params.hpp"
#include "flightcore/dynamics/quad_state.hpp"
#include "flightcore/rng.hpp"

namespace flightcore {

struct ImuReading {
  Vec3 accel = Vec3::Zero();  // specific force [m/s^2], body
  Vec3 gyro = Vec3::Zero();   // [rad/s], body
  double t = 0.0;
};

/// White Gaussian noise per sample plus a constant bias. The default model
/// is noise-free.
struct ImuNoiseModel {
  double accel_noise_std = 0.0;
  double gyro_noise_std = 0.0;
  Vec3 accel_bias = Vec3::Zero();
  Vec3 gyro_bias = Vec3::Zero();

  bool noise_free() const {
    return accel_noise_std == 0.0 && gyro_noise_std == 0.0 && accel_bias.isZero(0.0) &&
           gyro_bias.isZero(0.0);
  }
  void validate() const;
};

/// accel = R^T (dv + [0,0,g]) + bias + N(0, accel_std)
/// gyro  = omega + bias + N(0, gyro_std)
/// The stream is only advanced for nonzero standard deviations, so a
/// noise-free IMU never perturbs other consumers of the same stream.
ImuReading imu_measure(const QuadState& state, const StateDerivative& deriv,
                       const QuadParams& params, const ImuNoiseModel& noise, RngStream& rng);

}  // namespace flightcore
