#include "flightcore/env/sampler.hpp"

#include "flightcore/dynamics/quad_dynamics.hpp"
#include "flightcore/errors.hpp"

namespace flightcore {

void InitSampler::validate() const {
  const Vec3* centers[] = {&position_center, &euler_center, &velocity_center, &omega_center};
  const Vec3* widths[] = {&position_half_width, &euler_half_width, &velocity_half_width,
                          &omega_half_width};
  for (const Vec3* c : centers) {
    if (!c->allFinite()) throw ArgumentError("sampler centre must be finite");
  }
  for (const Vec3* w : widths) {
    if (!w->allFinite() || (w->array() < 0.0).any()) {
      throw ArgumentError("sampler half-widths must be finite and >= 0");
    }
  }
}

InitSampler InitSampler::hover_at(const Vec3& position) {
  InitSampler s;
  s.position_center = position;
  return s;
}

QuadState sample_state(const InitSampler& sampler, const QuadParams& params, RngStream& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto draw = [&](const Vec3& center, const Vec3& half) {
    Vec3 out;
    for (int a = 0; a < 3; ++a) out[a] = center[a] + half[a] * unit(rng);
    return out;
  };
  QuadState s = hover_state(Vec3::Zero(), params.hover_thrust_per_rotor());
  s.p = draw(sampler.position_center, sampler.position_half_width);
  const Vec3 euler = draw(sampler.euler_center, sampler.euler_half_width);
  s.q = euler.isZero(0.0) ? Quat::Identity() : quat_from_euler_zyx(euler).normalized();
  s.v = draw(sampler.velocity_center, sampler.velocity_half_width);
  s.omega = draw(sampler.omega_center, sampler.omega_half_width);
  return s;
}

}  // namespace flightcore
