#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "flightcore/config.hpp"
#include "flightcore/control/command.hpp"
#include "flightcore/control/rate_controller.hpp"
#include "flightcore/dynamics/quad_dynamics.hpp"
#include "flightcore/env/sampler.hpp"
#include "flightcore/sensing/imu.hpp"
#include "flightcore/tasks/tasks.hpp"

namespace flightcore {

struct VecSimConfig {
  std::size_t n_envs = 1;
  double dt = 0.02;
  Integrator method = Integrator::RK4;
  int n_workers = 1;
  std::uint64_t base_seed = 0;
  QuadParams params;
  /// Optional per-environment parameters (domain randomization). Either
  /// empty or exactly n_envs entries.
  std::vector<QuadParams> per_env_params;
  RateGains gains;
  ImuNoiseModel imu;

  void validate() const;
};

/// n_envs, n_workers, dt, method, seed plus the vehicle/gain/IMU keys.
VecSimConfig load_vec_config(const KeyValueConfig& cfg, VecSimConfig defaults = {});

/// Per-step outputs, one entry per environment. Observations are stored
/// row-major (n_envs x obs_dim) and only filled when a task is active.
struct BatchResult {
  std::vector<QuadState> states;
  std::vector<ImuReading> imu;
  std::vector<std::uint8_t> done;
  std::vector<TerminationFlags> flags;
  std::vector<double> rewards;
  std::size_t obs_dim = 0;
  std::vector<double> observations;
  /// Observation at the terminal state for envs with done[i] set; the
  /// matching row of `observations` already holds the reset observation.
  std::vector<double> terminal_observations;
  /// Measured env-steps per wall-clock second for the last call.
  double steps_per_second = 0.0;

  void resize(std::size_t n, std::size_t obs_dim);
  std::span<const double> observation(std::size_t i) const {
    return {observations.data() + i * obs_dim, obs_dim};
  }
};

/// Which stepping kernel VecEnv uses. Both produce bit-identical results;
/// the serial one is the reference the OpenMP kernel is tested against.
enum class Kernel { SerialReference, OpenMP };

/// N independent vehicles stepped together. Every environment owns its RNG
/// stream derived from (base_seed, index), so results never depend on the
/// worker count or scheduling.
class VecEnv {
 public:
  /// Throws ArgumentError if the task dt differs from config.dt.
  explicit VecEnv(VecSimConfig config, std::optional<TaskSpec> task = std::nullopt,
                  std::shared_ptr<const DynamicsModel> dynamics = nullptr);

  /// Resets every env from the task sampler (or a hover sampler in raw mode).
  const BatchResult& reset();
  /// Resets every env from `sampler`, which then also drives auto-resets.
  const BatchResult& reset(const InitSampler& sampler);

  /// One dt for every env; `commands.size()` must equal n_envs.
  const BatchResult& step(std::span<const Command> commands);
  /// Task actions, row-major n_envs x action_dim. Requires a task.
  const BatchResult& step_actions(std::span<const double> actions);

  const BatchResult& last() const { return result_; }
  const VecSimConfig& config() const { return config_; }
  const std::optional<TaskSpec>& task() const { return task_; }
  std::size_t size() const { return config_.n_envs; }

  void set_workers(int n_workers);
  void set_kernel(Kernel kernel) { kernel_ = kernel; }
  Kernel kernel() const { return kernel_; }

  /// FNV-1a over all env states.
  std::uint64_t batch_hash() const;

 private:
  void check_ready() const;

  VecSimConfig config_;
  std::optional<TaskSpec> task_;
  std::shared_ptr<const DynamicsModel> dynamics_;
  InitSampler sampler_;
  Kernel kernel_ = Kernel::OpenMP;
  bool ready_ = false;

  std::vector<QuadState> states_;
  std::vector<RngStream> streams_;
  std::vector<Command> decoded_;
  BatchResult result_;
};

}  // namespace flightcore
