#include "flightcore/dynamics/quad_dynamics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <string>

#include "flightcore/errors.hpp"

namespace flightcore {

bool QuadState::all_finite() const {
  return p.allFinite() && q.coeffs().allFinite() && v.allFinite() && omega.allFinite() &&
         f.allFinite() && std::isfinite(t);
}

bool StateDerivative::all_finite() const {
  return dp.allFinite() && dq.allFinite() && dv.allFinite() && domega.allFinite() &&
         df.allFinite();
}

QuadState hover_state(const Vec3& position, double hover_thrust_per_rotor) {
  QuadState s;
  s.p = position;
  s.f = Vec4::Constant(hover_thrust_per_rotor);
  return s;
}

std::uint64_t state_hash(const QuadState& s, std::uint64_t h) {
  auto feed = [&h](double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (int i = 0; i < 3; ++i) feed(s.p[i]);
  feed(s.q.w());
  feed(s.q.x());
  feed(s.q.y());
  feed(s.q.z());
  for (int i = 0; i < 3; ++i) feed(s.v[i]);
  for (int i = 0; i < 3; ++i) feed(s.omega[i]);
  for (int i = 0; i < 4; ++i) feed(s.f[i]);
  feed(s.t);
  return h;
}

std::string_view to_string(Integrator m) {
  return m == Integrator::Euler ? "euler" : "rk4";
}

Integrator parse_integrator(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "euler") return Integrator::Euler;
  if (lower == "rk4") return Integrator::RK4;
  throw ArgumentError("unknown integrator '" + std::string(name) + "' (expected euler|rk4)");
}

Mat3 rotation(const Quat& q) { return q.normalized().toRotationMatrix(); }

Vec3 euler_zyx(const Quat& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const double roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
  const double sinp = std::clamp(2.0 * (w * y - z * x), -1.0, 1.0);
  const double pitch = std::asin(sinp);
  const double yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
  return {roll, pitch, yaw};
}

Quat quat_from_euler_zyx(const Vec3& rpy) {
  return Quat(Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
              Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
              Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()));
}

Wrench mix(const Vec4& f, const QuadParams& params) {
  const double k = params.arm_length / std::sqrt(2.0);
  Wrench w;
  w.eta = Vec3(k * (f[0] - f[1] - f[2] + f[3]),
               k * (-f[0] - f[1] + f[2] + f[3]),
               params.kappa * (f[0] - f[1] + f[2] - f[3]));
  w.c = (f[0] + f[1] + f[2] + f[3]) / params.mass;
  return w;
}

Vec4 unmix(double c, const Vec3& eta, const QuadParams& params) {
  if (params.arm_length == 0.0 || params.kappa == 0.0) {
    throw ConfigurationError("singular allocation: arm_length and kappa must be nonzero");
  }
  // Closed-form inverse of the 4x4 allocation matrix; each row of the
  // forward map is orthogonal to the others with squared norm 4.
  const double total = c * params.mass;
  const double a = eta.x() * std::sqrt(2.0) / params.arm_length;
  const double b = eta.y() * std::sqrt(2.0) / params.arm_length;
  const double y = eta.z() / params.kappa;
  return 0.25 * Vec4(total + a - b + y,
                     total - a - b - y,
                     total - a + b + y,
                     total + a + b - y);
}

namespace detail {

StateDerivative derivative_unchecked(const QuadState& s, const QuadParams& params,
                                     const Vec4& thrust_cmd) {
  const Mat3 R = rotation(s.q);
  const Wrench w = mix(s.f, params);

  StateDerivative d;
  d.dp = s.v;
  d.dv = R.col(2) * w.c - Vec3(0.0, 0.0, params.gravity) -
         R * params.drag.asDiagonal() * (R.transpose() * s.v);

  // dq = 1/2 Lambda(omega) q, scalar-first; equals 1/2 q (x) [0, omega].
  const double qw = s.q.w(), qx = s.q.x(), qy = s.q.y(), qz = s.q.z();
  const double wx = s.omega.x(), wy = s.omega.y(), wz = s.omega.z();
  d.dq = 0.5 * Vec4(-wx * qx - wy * qy - wz * qz,
                     wx * qw + wz * qy - wy * qz,
                     wy * qw - wz * qx + wx * qz,
                     wz * qw + wy * qx - wx * qy);

  const Vec3 J_omega = params.inertia.cwiseProduct(s.omega);
  d.domega = (w.eta - s.omega.cross(J_omega)).cwiseQuotient(params.inertia);
  d.df = (thrust_cmd - s.f) / params.motor_tau;
  return d;
}

}  // namespace detail

namespace {

QuadState offset(const QuadState& s, const StateDerivative& k, double h) {
  QuadState out;
  out.p = s.p + h * k.dp;
  out.q = Quat(s.q.w() + h * k.dq[0], s.q.x() + h * k.dq[1], s.q.y() + h * k.dq[2],
               s.q.z() + h * k.dq[3]);
  out.v = s.v + h * k.dv;
  out.omega = s.omega + h * k.domega;
  out.f = s.f + h * k.df;
  out.t = s.t + h;
  return out;
}

StateDerivative rk4_blend(const StateDerivative& k1, const StateDerivative& k2,
                          const StateDerivative& k3, const StateDerivative& k4) {
  StateDerivative k;
  k.dp = (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp) / 6.0;
  k.dq = (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq) / 6.0;
  k.dv = (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv) / 6.0;
  k.domega = (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega) / 6.0;
  k.df = (k1.df + 2.0 * k2.df + 2.0 * k3.df + k4.df) / 6.0;
  return k;
}

void check_inputs(const QuadState& state, const QuadParams& params, const Vec4& thrust_cmd) {
  params.validate();
  if (!state.all_finite()) throw ContractViolation("non-finite QuadState");
  if (!thrust_cmd.allFinite()) throw ContractViolation("non-finite thrust command");
}

}  // namespace

StateDerivative derivative(const QuadState& state, const QuadParams& params,
                           const Vec4& thrust_cmd) {
  check_inputs(state, params, thrust_cmd);
  if (std::abs(state.q.norm() - 1.0) > 1e-6) {
    throw ContractViolation("quaternion not unit length");
  }
  return detail::derivative_unchecked(state, params, thrust_cmd);
}

QuadState step(const QuadState& state, const QuadParams& params, const Vec4& thrust_cmd,
               double dt, Integrator method) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("dt must be > 0");
  check_inputs(state, params, thrust_cmd);
  const Vec4 cmd = thrust_cmd.cwiseMax(params.thrust_min).cwiseMin(params.thrust_max);

  QuadState next;
  if (method == Integrator::Euler) {
    next = offset(state, detail::derivative_unchecked(state, params, cmd), dt);
  } else {
    const StateDerivative k1 = detail::derivative_unchecked(state, params, cmd);
    const StateDerivative k2 = detail::derivative_unchecked(offset(state, k1, 0.5 * dt), params, cmd);
    const StateDerivative k3 = detail::derivative_unchecked(offset(state, k2, 0.5 * dt), params, cmd);
    const StateDerivative k4 = detail::derivative_unchecked(offset(state, k3, dt), params, cmd);
    next = offset(state, rk4_blend(k1, k2, k3, k4), dt);
  }
  next.t = state.t + dt;
  next.q.normalize();
  next.f = next.f.cwiseMax(params.thrust_min).cwiseMin(params.thrust_max);
  if (!next.all_finite()) throw ContractViolation("integration produced non-finite state");
  return next;
}

}  // namespace flightcore
