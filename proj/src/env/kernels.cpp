#include "flightcore/env/kernels.hpp"

#include <exception>

#include <omp.h>

namespace flightcore::kernels {

void advance_env(std::size_t i, EnvBatch envs, const Command& cmd, const StepContext& ctx,
                 BatchResult& out) {
  const VecSimConfig& cfg = *ctx.config;
  const QuadParams& params = cfg.per_env_params.empty() ? cfg.params : cfg.per_env_params[i];
  QuadState& state = envs.states[i];
  RngStream& rng = envs.streams[i];

  Vec4 f_des = thrust_setpoint(cmd, state, params, cfg.gains);
  if (ctx.task && ctx.task->kind == TaskKind::MotorFailure) f_des[ctx.task->failed_rotor] = 0.0;

  const QuadState prev = state;
  state = ctx.dynamics->step(state, params, f_des, cfg.dt, cfg.method);
  const StateDerivative deriv = detail::derivative_unchecked(state, params, f_des);
  out.imu[i] = imu_measure(state, deriv, params, cfg.imu, rng);

  if (!ctx.task) {
    out.states[i] = state;
    out.done[i] = 0;
    return;
  }

  const TaskSpec& task = *ctx.task;
  const TerminationFlags flags = check_termination(state, prev, task, state.t);
  out.flags[i] = flags;
  out.rewards[i] = reward(features(state), task, flags);
  out.done[i] = flags.terminal() ? 1 : 0;

  const std::size_t dim = out.obs_dim;
  std::span<double> obs(out.observations.data() + i * dim, dim);
  if (flags.terminal()) {
    observe_into(state, task, std::span<double>(out.terminal_observations.data() + i * dim, dim));
    state = sample_state(*ctx.sampler, params, rng);
    if (task.kind == TaskKind::MotorFailure) state.f[task.failed_rotor] = 0.0;
  }
  observe_into(state, task, obs);
  out.states[i] = state;
}

void advance_serial(EnvBatch envs, std::span<const Command> commands, const StepContext& ctx,
                    BatchResult& out) {
  for (std::size_t i = 0; i < commands.size(); ++i) advance_env(i, envs, commands[i], ctx, out);
}

void advance_parallel(EnvBatch envs, std::span<const Command> commands, const StepContext& ctx,
                      BatchResult& out, int n_workers) {
  const auto n = static_cast<std::int64_t>(commands.size());
  std::exception_ptr failure;
#pragma omp parallel for num_threads(n_workers) schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      advance_env(static_cast<std::size_t>(i), envs, commands[i], ctx, out);
    } catch (...) {
#pragma omp critical(flightcore_kernel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace flightcore::kernels
