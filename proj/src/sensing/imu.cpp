#include "flightcore/sensing/imu.hpp"

#include <cmath>

#include "flightcore/dynamics/quad_dynamics.hpp"
#include "flightcore/errors.hpp"

namespace flightcore {

void ImuNoiseModel::validate() const {
  if (!(accel_noise_std >= 0.0) || !(gyro_noise_std >= 0.0) || !accel_bias.allFinite() ||
      !gyro_bias.allFinite()) {
    throw ContractViolation("IMU noise stds must be >= 0 and biases finite");
  }
}

namespace {

Vec3 gaussian3(double stddev, RngStream& rng) {
  if (stddev == 0.0) return Vec3::Zero();
  std::normal_distribution<double> n(0.0, stddev);
  const double x = n(rng);
  const double y = n(rng);
  const double z = n(rng);
  return {x, y, z};
}

}  // namespace

ImuReading imu_measure(const QuadState& state, const StateDerivative& deriv,
                       const QuadParams& params, const ImuNoiseModel& noise, RngStream& rng) {
  const Mat3 R = rotation(state.q);
  ImuReading r;
  r.t = state.t;
  r.accel = R.transpose() * (deriv.dv + Vec3(0.0, 0.0, params.gravity)) + noise.accel_bias +
            gaussian3(noise.accel_noise_std, rng);
  r.gyro = state.omega + noise.gyro_bias + gaussian3(noise.gyro_noise_std, rng);
  return r;
}

}  // namespace flightcore
