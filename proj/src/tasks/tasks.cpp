#include "flightcore/tasks/tasks.hpp"

#include <cmath>
#include <numbers>

#include "flightcore/dynamics/quad_dynamics.hpp"
#include "flightcore/errors.hpp"

namespace flightcore {

namespace {

constexpr double kDeg30 = std::numbers::pi / 6.0;

// Stabilization-style shaping term shared by the stabilize and gate tasks.
double goal_term(const TaskFeatures& x, const TaskSpec& spec) {
  return -(spec.weights.c1 * (x.p - spec.p_target).norm() +
           spec.weights.c2 * (x.theta - spec.theta_target).norm() +
           spec.weights.c3 * (x.v - spec.v_target).norm());
}

Vec3 gate_start_center(const Gate& gate) { return gate.position - 3.0 * gate.normal(); }

}  // namespace

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Stabilize: return "stabilize";
    case TaskKind::MotorFailure: return "motor_failure";
    case TaskKind::GateFlight: return "gate";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view name) {
  if (name == "stabilize") return TaskKind::Stabilize;
  if (name == "motor_failure") return TaskKind::MotorFailure;
  if (name == "gate") return TaskKind::GateFlight;
  throw ArgumentError("unknown task '" + std::string(name) +
                      "' (expected stabilize|motor_failure|gate)");
}

Vec3 Gate::normal() const { return quat_from_euler_zyx(euler).toRotationMatrix().col(0); }

void TaskSpec::validate() const {
  if (!(episode_length > 0.0) || !std::isfinite(episode_length)) {
    throw ArgumentError("episode_length must be > 0");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("task dt must be > 0");
  const double w[] = {weights.c1, weights.c2, weights.c3, weights.c4};
  for (double c : w) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ArgumentError("reward weights must be >= 0");
  }
  if (!p_target.allFinite() || !theta_target.allFinite() || !v_target.allFinite() ||
      !omega_target.allFinite()) {
    throw ArgumentError("task target must be finite");
  }
  if (kind == TaskKind::GateFlight) {
    if (!(gate.radius > 0.0)) throw ArgumentError("gate radius must be > 0");
    if (!(gate.lateral_margin >= 0.0)) throw ArgumentError("gate lateral margin must be >= 0");
    if (!gate.position.allFinite() || !gate.euler.allFinite()) {
      throw ArgumentError("gate pose must be finite");
    }
  }
  if (kind == TaskKind::MotorFailure && (failed_rotor < 0 || failed_rotor > 3)) {
    throw ArgumentError("failed_rotor must name one of the four rotors");
  }
  sampler.validate();
}

std::size_t TaskSpec::observation_dim() const {
  switch (kind) {
    case TaskKind::Stabilize: return 10;
    case TaskKind::MotorFailure: return 12;
    case TaskKind::GateFlight: return 18;
  }
  return 0;
}

std::size_t TaskSpec::action_dim() const { return kind == TaskKind::MotorFailure ? 3 : 4; }

std::size_t TaskSpec::episode_steps() const {
  return static_cast<std::size_t>(std::llround(episode_length / dt));
}

TaskSpec TaskSpec::stabilize() {
  TaskSpec s;
  s.kind = TaskKind::Stabilize;
  s.sampler.position_center = s.p_target;
  s.sampler.position_half_width = Vec3::Constant(3.0);
  s.sampler.euler_half_width = Vec3::Constant(kDeg30);
  s.sampler.velocity_half_width = Vec3::Constant(1.0);
  return s;
}

TaskSpec TaskSpec::motor_failure() {
  TaskSpec s = stabilize();
  s.kind = TaskKind::MotorFailure;
  return s;
}

TaskSpec TaskSpec::gate_flight() {
  TaskSpec s;
  s.kind = TaskKind::GateFlight;
  s.p_target = s.gate.position + 3.0 * s.gate.normal();
  s.sampler.position_center = gate_start_center(s.gate);
  s.sampler.position_half_width = Vec3::Constant(1.0);
  s.sampler.velocity_half_width = Vec3::Constant(1.0);
  return s;
}

TaskSpec TaskSpec::for_kind(TaskKind kind) {
  switch (kind) {
    case TaskKind::Stabilize: return stabilize();
    case TaskKind::MotorFailure: return motor_failure();
    case TaskKind::GateFlight: return gate_flight();
  }
  throw ArgumentError("unknown task kind");
}

TaskSpec load_task_spec(const KeyValueConfig& cfg) {
  TaskSpec s = TaskSpec::for_kind(parse_task_kind(cfg.get_string("task", "stabilize")));
  auto vec = [&cfg](const char* prefix, const char* const (&axes)[3], const Vec3& fallback) {
    Vec3 out;
    for (int a = 0; a < 3; ++a) out[a] = cfg.get_double(std::string(prefix) + axes[a], fallback[a]);
    return out;
  };
  static constexpr const char* xyz[3] = {"x", "y", "z"};
  static constexpr const char* rpy[3] = {"roll", "pitch", "yaw"};

  s.episode_length = cfg.get_double("episode_length", s.episode_length);
  s.dt = cfg.get_double("dt", s.dt);
  s.weights.c1 = cfg.get_double("reward_c1", s.weights.c1);
  s.weights.c2 = cfg.get_double("reward_c2", s.weights.c2);
  s.weights.c3 = cfg.get_double("reward_c3", s.weights.c3);
  s.weights.c4 = cfg.get_double("reward_c4", s.weights.c4);

  s.gate.position = vec("gate_p", xyz, s.gate.position);
  s.gate.euler = vec("gate_", rpy, s.gate.euler);
  s.gate.radius = cfg.get_double("gate_radius", s.gate.radius);
  s.gate.lateral_margin = cfg.get_double("gate_lateral_margin", s.gate.lateral_margin);

  const Vec3 default_target =
      s.kind == TaskKind::GateFlight ? Vec3(s.gate.position + 3.0 * s.gate.normal()) : s.p_target;
  s.p_target = vec("target_p", xyz, default_target);
  s.theta_target = vec("target_", rpy, s.theta_target);
  s.v_target = vec("target_v", xyz, s.v_target);

  s.failed_rotor = static_cast<int>(cfg.get_int("failed_rotor", s.failed_rotor + 1)) - 1;
  const std::string layout = cfg.get_string("attitude_layout", "euler_padded");
  if (layout == "euler_padded") {
    s.layout = AttitudeLayout::EulerPadded;
  } else if (layout == "quaternion") {
    s.layout = AttitudeLayout::Quaternion;
  } else {
    throw ConfigurationError("attitude_layout must be euler_padded|quaternion");
  }

  s.sampler.position_center =
      s.kind == TaskKind::GateFlight ? gate_start_center(s.gate) : s.p_target;
  s.sampler.position_half_width =
      Vec3::Constant(cfg.get_double("init_position_half_width", s.sampler.position_half_width.x()));
  s.sampler.euler_half_width =
      Vec3::Constant(cfg.get_double("init_euler_half_width", s.sampler.euler_half_width.x()));
  s.sampler.velocity_half_width =
      Vec3::Constant(cfg.get_double("init_velocity_half_width", s.sampler.velocity_half_width.x()));
  s.sampler.omega_half_width =
      Vec3::Constant(cfg.get_double("init_omega_half_width", s.sampler.omega_half_width.x()));
  s.validate();
  return s;
}

TaskFeatures features(const QuadState& state) {
  return {state.p, euler_zyx(state.q), state.v, state.omega};
}

void observe_into(const QuadState& state, const TaskSpec& spec, std::span<double> out) {
  if (out.size() != spec.observation_dim()) throw ArgumentError("observation buffer size mismatch");
  const TaskFeatures x = features(state);
  std::size_t k = 0;
  auto put = [&](const Vec3& v3) {
    for (int a = 0; a < 3; ++a) out[k++] = v3[a];
  };
  put(x.p);
  if (spec.kind == TaskKind::Stabilize && spec.layout == AttitudeLayout::Quaternion) {
    out[k++] = state.q.w();
    out[k++] = state.q.x();
    out[k++] = state.q.y();
    out[k++] = state.q.z();
    put(x.v);
    return;
  }
  put(x.theta);
  put(x.v);
  switch (spec.kind) {
    case TaskKind::Stabilize:
      out[k++] = 1.0;
      break;
    case TaskKind::MotorFailure:
      put(x.omega);
      break;
    case TaskKind::GateFlight:
      put(x.omega);
      put(spec.gate.position);
      put(spec.gate.euler);
      break;
  }
}

std::vector<double> observe(const QuadState& state, const TaskSpec& spec) {
  std::vector<double> out(spec.observation_dim());
  observe_into(state, spec, out);
  return out;
}

double reward_stabilize(const TaskFeatures& x, const TaskSpec& spec) { return goal_term(x, spec); }

double reward_motor_failure(const TaskFeatures& x, const TaskSpec& spec) {
  // Yaw angle and yaw rate are deliberately absent: with one rotor gone the
  // vehicle cannot hold heading.
  return -(spec.weights.c1 * (x.p - spec.p_target).norm() +
           spec.weights.c2 * x.theta.head<2>().norm() +
           spec.weights.c3 * x.v.norm() +
           spec.weights.c4 * x.omega.head<2>().norm());
}

double reward_gate(const TaskFeatures& x, const TaskSpec& spec, const TerminationFlags& flags) {
  if (flags.gate_hit || flags.ground_hit) return -0.1;
  return goal_term(x, spec) + 0.1;
}

double reward(const TaskFeatures& x, const TaskSpec& spec, const TerminationFlags& flags) {
  switch (spec.kind) {
    case TaskKind::Stabilize: return reward_stabilize(x, spec);
    case TaskKind::MotorFailure: return reward_motor_failure(x, spec);
    case TaskKind::GateFlight: return reward_gate(x, spec, flags);
  }
  return 0.0;
}

std::string_view TerminationFlags::reason() const {
  if (gate_hit) return "gate_hit";
  if (ground_hit) return "ground_hit";
  if (out_of_bounds) return "bounds";
  if (timeout) return "timeout";
  return "running";
}

GateCrossing classify_gate_crossing(const Vec3& prev, const Vec3& curr, const Gate& gate) {
  const Vec3 n = gate.normal();
  const double d0 = n.dot(prev - gate.position);
  const double d1 = n.dot(curr - gate.position);
  if ((d0 < 0.0) == (d1 < 0.0)) return GateCrossing::None;
  const double s = d0 / (d0 - d1);
  const Vec3 w = prev + s * (curr - prev) - gate.position;
  const double rho = (w - n * n.dot(w)).norm();
  if (rho <= gate.radius) return GateCrossing::Pass;
  if (rho <= gate.radius + gate.lateral_margin) return GateCrossing::Hit;
  return GateCrossing::Outside;
}

TerminationFlags check_termination(const QuadState& state, const QuadState& prev_state,
                                   const TaskSpec& spec, double t) {
  TerminationFlags flags;
  // Half-step slack: t is accumulated in floating point.
  flags.timeout = t >= spec.episode_length - 0.5 * spec.dt;
  if (spec.kind != TaskKind::GateFlight) return flags;

  flags.ground_hit = state.p.z() <= 0.0;
  switch (classify_gate_crossing(prev_state.p, state.p, spec.gate)) {
    case GateCrossing::Pass: flags.gate_pass = true; break;
    case GateCrossing::Hit: flags.gate_hit = true; break;
    case GateCrossing::Outside: flags.out_of_bounds = true; break;
    case GateCrossing::None: break;
  }
  return flags;
}

Command decode_action(std::span<const double> action, const TaskSpec& spec) {
  if (action.size() != spec.action_dim()) {
    throw ArgumentError("action has " + std::to_string(action.size()) + " entries, task '" +
                        std::string(to_string(spec.kind)) + "' expects " +
                        std::to_string(spec.action_dim()));
  }
  switch (spec.kind) {
    case TaskKind::Stabilize:
      return BodyRateCmd{std::max(0.0, action[0]), Vec3(action[1], action[2], action[3])};
    case TaskKind::MotorFailure: {
      RotorThrustCmd cmd;
      std::size_t k = 0;
      for (int i = 0; i < 4; ++i) cmd.f_des[i] = i == spec.failed_rotor ? 0.0 : action[k++];
      return cmd;
    }
    case TaskKind::GateFlight:
      return RotorThrustCmd{Vec4(action[0], action[1], action[2], action[3])};
  }
  throw ArgumentError("unknown task kind");
}

QuadState sample_task_state(const TaskSpec& spec, const QuadParams& params, RngStream& rng) {
  QuadState s = sample_state(spec.sampler, params, rng);
  if (spec.kind == TaskKind::MotorFailure) s.f[spec.failed_rotor] = 0.0;
  return s;
}

}  // namespace flightcore
