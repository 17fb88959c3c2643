#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "flightcore/config.hpp"
#include "flightcore/control/command.hpp"
#include "flightcore/dynamics/quad_params.hpp"
#include "flightcore/dynamics/quad_state.hpp"
#include "flightcore/env/sampler.hpp"

namespace flightcore {

enum class TaskKind { Stabilize, MotorFailure, GateFlight };

std::string_view to_string(TaskKind kind);
/// "stabilize" | "motor_failure" | "gate". Throws ArgumentError.
TaskKind parse_task_kind(std::string_view name);

/// How the 10-wide stabilization observation spends its attitude slots.
///   EulerPadded: [p(3), euler(3), v(3), 1.0]
///   Quaternion:  [p(3), q_wxyz(4), v(3)]
enum class AttitudeLayout { EulerPadded, Quaternion };

struct RewardWeights {
  double c1 = 2e-3;  // position
  double c2 = 2e-3;  // attitude
  double c3 = 2e-4;  // linear velocity
  double c4 = 2e-4;  // body rates (motor-failure task)
};

/// Circular gate; the vehicle flies through along the gate's body x axis.
struct Gate {
  Vec3 position = Vec3(0.0, 0.0, 2.5);
  Vec3 euler = Vec3::Zero();      // ZYX [roll, pitch, yaw]
  double radius = 1.0;            // [m]
  // Crossings with r < rho <= r + lateral_margin count as hitting the gate
  // (frame or the external region around it); farther out is out of bounds.
  double lateral_margin = 3.0;

  Vec3 normal() const;
};

struct TaskSpec {
  TaskKind kind = TaskKind::Stabilize;
  Vec3 p_target = Vec3(0.0, 0.0, 5.0);
  Vec3 theta_target = Vec3::Zero();
  Vec3 v_target = Vec3::Zero();
  Vec3 omega_target = Vec3::Zero();
  double episode_length = 5.0;  // [s]
  double dt = 0.02;             // [s]
  RewardWeights weights;
  Gate gate;
  int failed_rotor = 3;         // zero-based; rotor 4 by default
  AttitudeLayout layout = AttitudeLayout::EulerPadded;
  InitSampler sampler;

  void validate() const;
  std::size_t observation_dim() const;
  std::size_t action_dim() const;
  /// round(episode_length / dt)
  std::size_t episode_steps() const;

  static TaskSpec stabilize();
  static TaskSpec motor_failure();
  static TaskSpec gate_flight();
  static TaskSpec for_kind(TaskKind kind);
};

/// Task spec from `task = ...` plus per-field keys; see README for the list.
TaskSpec load_task_spec(const KeyValueConfig& cfg);

/// The quantities rewards are defined on: position, ZYX Euler angles,
/// velocity and body rates.
struct TaskFeatures {
  Vec3 p = Vec3::Zero();
  Vec3 theta = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 omega = Vec3::Zero();
};

TaskFeatures features(const QuadState& state);

/// Writes the task observation into `out` (size observation_dim()).
void observe_into(const QuadState& state, const TaskSpec& spec, std::span<double> out);
std::vector<double> observe(const QuadState& state, const TaskSpec& spec);

double reward_stabilize(const TaskFeatures& x, const TaskSpec& spec);
double reward_motor_failure(const TaskFeatures& x, const TaskSpec& spec);

struct TerminationFlags {
  bool timeout = false;
  bool gate_pass = false;
  bool gate_hit = false;
  bool ground_hit = false;
  bool out_of_bounds = false;

  /// Whether the episode ends. A gate pass is reported but does not end
  /// the episode: the target hover point lies behind the gate.
  bool terminal() const { return timeout || gate_hit || ground_hit || out_of_bounds; }
  std::string_view reason() const;
};

double reward_gate(const TaskFeatures& x, const TaskSpec& spec, const TerminationFlags& flags);

/// Dispatches on spec.kind.
double reward(const TaskFeatures& x, const TaskSpec& spec, const TerminationFlags& flags);

/// Outcome of the straight segment prev -> curr against the gate plane.
enum class GateCrossing { None, Pass, Hit, Outside };
GateCrossing classify_gate_crossing(const Vec3& prev, const Vec3& curr, const Gate& gate);

/// `t` is the elapsed episode time. Ground, gate and bounds checks apply to
/// the gate task only; stabilization tasks end on timeout.
TerminationFlags check_termination(const QuadState& state, const QuadState& prev_state,
                                   const TaskSpec& spec, double t);

/// Maps a task action (length action_dim()) to a simulator command.
/// Body-rate thrust c is floored at 0; the motor-failure action fills the
/// three live rotors in order and pins the failed rotor to 0 N.
Command decode_action(std::span<const double> action, const TaskSpec& spec);

/// Initial state drawn from the task sampler; the failed rotor starts at 0 N.
QuadState sample_task_state(const TaskSpec& spec, const QuadParams& params, RngStream& rng);

}  // namespace flightcore
