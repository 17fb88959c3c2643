#include "flightcore/control/rate_controller.hpp"

#include <cmath>

#include "flightcore/dynamics/quad_dynamics.hpp"
#include "flightcore/errors.hpp"

namespace flightcore {

void RateGains::validate() const {
  if (!kp.allFinite() || (kp.array() <= 0.0).any()) {
    throw ContractViolation("rate gains must be > 0");
  }
}

Vec4 bodyrate_to_thrusts(const BodyRateCmd& cmd, const QuadState& state,
                         const QuadParams& params, const RateGains& gains) {
  if (!(cmd.c >= 0.0) || !std::isfinite(cmd.c) || !cmd.omega_des.allFinite()) {
    throw ContractViolation("body-rate command requires finite c >= 0 and finite rates");
  }
  const Vec3 J_omega = params.inertia.cwiseProduct(state.omega);
  const Vec3 eta_des =
      params.inertia.cwiseProduct(gains.kp.cwiseProduct(cmd.omega_des - state.omega)) +
      state.omega.cross(J_omega);
  return unmix(cmd.c, eta_des, params).cwiseMax(params.thrust_min).cwiseMin(params.thrust_max);
}

Vec4 thrust_setpoint(const Command& cmd, const QuadState& state, const QuadParams& params,
                     const RateGains& gains) {
  if (const auto* rate = std::get_if<BodyRateCmd>(&cmd)) {
    return bodyrate_to_thrusts(*rate, state, params, gains);
  }
  const Vec4& f = std::get<RotorThrustCmd>(cmd).f_des;
  if (!f.allFinite()) throw ContractViolation("non-finite rotor thrust command");
  return f.cwiseMax(params.thrust_min).cwiseMin(params.thrust_max);
}

}  // namespace flightcore
