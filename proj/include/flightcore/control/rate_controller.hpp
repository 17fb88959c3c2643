#pragma once

#include "flightcore/control/command.hpp"
#include "flightcore/dynamics/quad_params.hpp"

namespace flightcore {

/// Proportional body-rate gains [1/s].
struct RateGains {
  Vec3 kp = Vec3(7.5, 7.5, 7.5);  // ~critical damping against the default motor lag
  void validate() const;
};

/// Feedback-linearizing rate loop:
///   eta_des = J (kp .* (omega_des - omega)) + omega x J omega
/// allocated through unmix() and clamped per rotor to the thrust limits.
Vec4 bodyrate_to_thrusts(const BodyRateCmd& cmd, const QuadState& state,
                         const QuadParams& params, const RateGains& gains);

/// Resolves either command flavor to the thrust setpoint fed to the
/// dynamics. Rotor-thrust commands are clamped to the limits as well.
Vec4 thrust_setpoint(const Command& cmd, const QuadState& state, const QuadParams& params,
                     const RateGains& gains);

}  // namespace flightcore
