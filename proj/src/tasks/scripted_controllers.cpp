#include "flightcore/tasks/scripted_controllers.hpp"

#include <cmath>
#include <numbers>

#include "flightcore/dynamics/quad_dynamics.hpp"
#include "flightcore/errors.hpp"

namespace flightcore {

HoverController::HoverController(QuadParams params, RateGains rate_gains, Gains gains)
    : params_(std::move(params)), rate_gains_(rate_gains), gains_(gains) {}

BodyRateCmd HoverController::body_rate_command(const QuadState& state, const TaskSpec& spec) const {
  const Vec3 g(0.0, 0.0, params_.gravity);
  Vec3 accel = -gains_.kp_pos * (state.p - spec.p_target) - gains_.kd_pos * (state.v - spec.v_target);

  // Limit the horizontal demand so the thrust axis stays within max_tilt.
  const double vertical = std::max(accel.z() + g.z(), 0.2 * g.z());
  const double max_horizontal = vertical * std::tan(gains_.max_tilt);
  const double horizontal = accel.head<2>().norm();
  if (horizontal > max_horizontal) accel.head<2>() *= max_horizontal / horizontal;
  const Vec3 thrust_dir = Vec3(accel.x(), accel.y(), vertical).normalized();

  const Mat3 R = rotation(state.q);
  const Vec3 z_body = R.col(2);
  BodyRateCmd cmd;
  cmd.c = std::max(0.0, Vec3(accel.x(), accel.y(), vertical).dot(z_body));
  const Vec3 tilt_error_body = R.transpose() * z_body.cross(thrust_dir);
  cmd.omega_des = gains_.k_att * tilt_error_body;
  const double yaw = euler_zyx(state.q).z();
  cmd.omega_des.z() = -gains_.k_yaw * std::remainder(yaw - spec.theta_target.z(), 2.0 * std::numbers::pi);
  return cmd;
}

void HoverController::act(const QuadState& state, const TaskSpec& spec, RngStream&,
                          std::span<double> action) {
  const BodyRateCmd cmd = body_rate_command(state, spec);
  if (spec.kind == TaskKind::Stabilize) {
    action[0] = cmd.c;
    action[1] = cmd.omega_des.x();
    action[2] = cmd.omega_des.y();
    action[3] = cmd.omega_des.z();
    return;
  }
  const Vec4 f = bodyrate_to_thrusts(cmd, state, params_, rate_gains_);
  std::size_t k = 0;
  for (int i = 0; i < 4; ++i) {
    if (spec.kind == TaskKind::MotorFailure && i == spec.failed_rotor) continue;
    action[k++] = f[i];
  }
}

void RandomController::act(const QuadState&, const TaskSpec& spec, RngStream& rng,
                           std::span<double> action) {
  if (spec.kind == TaskKind::Stabilize) {
    std::uniform_real_distribution<double> thrust(0.0, 2.0 * params_.gravity);
    std::uniform_real_distribution<double> rate(-std::numbers::pi, std::numbers::pi);
    action[0] = thrust(rng);
    for (int i = 1; i < 4; ++i) action[i] = rate(rng);
    return;
  }
  std::uniform_real_distribution<double> thrust(params_.thrust_min, params_.thrust_max);
  for (double& a : action) a = thrust(rng);
}

std::unique_ptr<ScriptedController> make_controller(std::string_view name, const QuadParams& params,
                                                    const RateGains& rate_gains) {
  if (name == "hover") return std::make_unique<HoverController>(params, rate_gains);
  if (name == "random") return std::make_unique<RandomController>(params);
  throw ArgumentError("unknown controller '" + std::string(name) + "' (expected hover|random|external)");
}

}  // namespace flightcore
