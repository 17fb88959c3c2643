#pragma once

#include <cstdint>

#include "flightcore/dynamics/quad_state.hpp"

namespace flightcore {

inline constexpr double kGravity = 9.81;

/// Vehicle parameters. Defaults describe a small hobby-class quadrotor.
struct QuadParams {
  double mass = 1.0;                                  // [kg]
  double arm_length = 0.17;                           // [m]
  Vec3 inertia = Vec3(0.0025, 0.0021, 0.0043);        // diag(J) [kg m^2]
  Vec3 drag = Vec3::Zero();                           // diag(D) [1/s]
  double kappa = 0.016;                               // rotor torque coefficient [m]
  double motor_tau = 0.033;                           // first-order motor constant [s]
  double thrust_min = 0.0;                            // [N]
  double thrust_max = 8.0;                            // [N]
  double gravity = kGravity;                          // [m/s^2]

  /// Throws ContractViolation naming the first broken constraint.
  void validate() const;
  bool valid() const noexcept;

  double hover_thrust_per_rotor() const { return mass * gravity / 4.0; }

  /// Stable digest of all fields; the bridge uses it to confirm that a
  /// client and the server agree on the vehicle.
  std::uint64_t digest() const;
};

}  // namespace flightcore
