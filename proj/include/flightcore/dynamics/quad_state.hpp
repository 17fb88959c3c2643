#pragma once

#include <cstdint>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace flightcore {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Quat = Eigen::Quaterniond;
using Mat3 = Eigen::Matrix3d;

/// Full simulated state of one vehicle. World frame is z-up; q rotates
/// body vectors into the world frame.
struct QuadState {
  Vec3 p = Vec3::Zero();       // position [m], world
  Quat q = Quat::Identity();   // orientation world <- body
  Vec3 v = Vec3::Zero();       // linear velocity [m/s], world
  Vec3 omega = Vec3::Zero();   // body rates [rad/s], body
  Vec4 f = Vec4::Zero();       // rotor thrusts [N]
  double t = 0.0;              // simulation time [s]

  bool all_finite() const;
};

/// Time derivative of QuadState. dq is stored scalar-first [w, x, y, z].
struct StateDerivative {
  Vec3 dp = Vec3::Zero();
  Vec4 dq = Vec4::Zero();
  Vec3 dv = Vec3::Zero();
  Vec3 domega = Vec3::Zero();
  Vec4 df = Vec4::Zero();

  bool all_finite() const;
};

/// Hover at `position` with every rotor carrying a quarter of the weight.
QuadState hover_state(const Vec3& position, double hover_thrust_per_rotor);

/// Bitwise FNV-1a digest of every double in the state. Used to compare
/// batches across worker counts.
std::uint64_t state_hash(const QuadState& s, std::uint64_t seed = 14695981039346656037ull);

}  // namespace flightcore
