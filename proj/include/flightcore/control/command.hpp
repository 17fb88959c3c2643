#pragma once

#include <variant>

#include "flightcore/dynamics/quad_state.hpp"

namespace flightcore {

/// Mass-normalized collective thrust plus desired body rates.
struct BodyRateCmd {
  double c = 0.0;              // [m/s^2], >= 0
  Vec3 omega_des = Vec3::Zero();  // [rad/s]
};

/// Direct per-rotor thrust setpoints.
struct RotorThrustCmd {
  Vec4 f_des = Vec4::Zero();  // [N]
};

using Command = std::variant<BodyRateCmd, RotorThrustCmd>;

}  // namespace flightcore
