#pragma once

#include <memory>
#include <span>
#include <string_view>

#include "flightcore/dynamics/quad_params.hpp"
#include "flightcore/dynamics/quad_state.hpp"

namespace flightcore {

enum class Integrator { Euler, RK4 };

std::string_view to_string(Integrator m);
/// Accepts "euler" / "rk4" (case-insensitive). Throws ArgumentError.
Integrator parse_integrator(std::string_view name);

/// Collective mass-normalized thrust and body torques produced by four rotors.
struct Wrench {
  double c = 0.0;          // [m/s^2]
  Vec3 eta = Vec3::Zero(); // [N m]
};

/// Rotor layout (x configuration, viewed from above, body x forward):
///   eta_x = l/sqrt(2) ( f1 - f2 - f3 + f4)
///   eta_y = l/sqrt(2) (-f1 - f2 + f3 + f4)
///   eta_z = kappa     ( f1 - f2 + f3 - f4)
///   c     = (f1 + f2 + f3 + f4) / m
Wrench mix(const Vec4& thrusts, const QuadParams& params);

/// Exact inverse of mix(). No clamping: callers project onto the thrust
/// limits themselves. Throws ConfigurationError if l or kappa is zero.
Vec4 unmix(double c, const Vec3& eta, const QuadParams& params);

/// Right-hand side of the rigid-body + motor-lag ODE. Validates inputs.
StateDerivative derivative(const QuadState& state, const QuadParams& params,
                           const Vec4& thrust_cmd);

/// Advances `state` by dt with the chosen scheme and renormalizes the
/// quaternion. The thrust setpoints and the resulting rotor thrusts are
/// both clamped to [thrust_min, thrust_max].
QuadState step(const QuadState& state, const QuadParams& params,
               const Vec4& thrust_cmd, double dt, Integrator method);

namespace detail {
/// derivative() without precondition checks. The quaternion may be
/// slightly off unit length (RK4 stages); the rotation uses its normalized
/// value while dq is formed from the raw value.
StateDerivative derivative_unchecked(const QuadState& state, const QuadParams& params,
                                     const Vec4& thrust_cmd);
}  // namespace detail

/// Swappable dynamics backend. Only the classical rigid-body model ships
/// here; simulator-backed or hardware-in-the-loop backends plug in behind
/// the same two calls.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;
  virtual StateDerivative derivative(const QuadState& state, const QuadParams& params,
                                     const Vec4& thrust_cmd) const = 0;
  virtual QuadState step(const QuadState& state, const QuadParams& params,
                         const Vec4& thrust_cmd, double dt, Integrator method) const = 0;
};

class ClassicalQuadDynamics final : public DynamicsModel {
 public:
  StateDerivative derivative(const QuadState& state, const QuadParams& params,
                             const Vec4& thrust_cmd) const override {
    return flightcore::derivative(state, params, thrust_cmd);
  }
  QuadState step(const QuadState& state, const QuadParams& params, const Vec4& thrust_cmd,
                 double dt, Integrator method) const override {
    return flightcore::step(state, params, thrust_cmd, dt, method);
  }
};

/// Rotation matrix world <- body of a (possibly unnormalized) quaternion.
Mat3 rotation(const Quat& q);

/// ZYX Euler angles [roll, pitch, yaw] of a unit quaternion.
Vec3 euler_zyx(const Quat& q);
/// Inverse of euler_zyx.
Quat quat_from_euler_zyx(const Vec3& rpy);

}  // namespace flightcore
