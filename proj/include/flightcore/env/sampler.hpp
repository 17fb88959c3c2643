#pragma once

#include "flightcore/dynamics/quad_params.hpp"
#include "flightcore/dynamics/quad_state.hpp"
#include "flightcore/rng.hpp"

namespace flightcore {

/// Uniform boxes, centre +- half-width per axis, for each state block.
/// Attitude is sampled as ZYX Euler angles. Rotor thrusts start at hover.
struct InitSampler {
  Vec3 position_center = Vec3(0.0, 0.0, 5.0);
  Vec3 position_half_width = Vec3::Zero();
  Vec3 euler_center = Vec3::Zero();
  Vec3 euler_half_width = Vec3::Zero();
  Vec3 velocity_center = Vec3::Zero();
  Vec3 velocity_half_width = Vec3::Zero();
  Vec3 omega_center = Vec3::Zero();
  Vec3 omega_half_width = Vec3::Zero();

  /// Throws ArgumentError for negative or non-finite ranges.
  void validate() const;

  /// Degenerate sampler that always returns hover at `position`.
  static InitSampler hover_at(const Vec3& position);
};

/// Draws one state. Consumes exactly 12 uniforms from the stream, in block
/// order p, euler, v, omega, so streams stay aligned regardless of ranges.
QuadState sample_state(const InitSampler& sampler, const QuadParams& params, RngStream& rng);

}  // namespace flightcore
