#pragma once

#include <span>

#include "flightcore/env/vec_env.hpp"

namespace flightcore::kernels {

/// Read-only inputs shared by every environment in one batch step.
struct StepContext {
  const VecSimConfig* config = nullptr;
  const TaskSpec* task = nullptr;  // null in raw mode
  const InitSampler* sampler = nullptr;
  const DynamicsModel* dynamics = nullptr;
};

/// Mutable per-environment data; index i is touched by exactly one worker.
struct EnvBatch {
  std::span<QuadState> states;
  std::span<RngStream> streams;
};

/// Steps env i: low-level control, integration, IMU, then (with a task)
/// reward, termination and auto-reset. Writes row i of `out`.
void advance_env(std::size_t i, EnvBatch envs, const Command& cmd, const StepContext& ctx,
                 BatchResult& out);

/// Reference loop, one env after another.
void advance_serial(EnvBatch envs, std::span<const Command> commands, const StepContext& ctx,
                    BatchResult& out);

/// Static chunking of envs over `n_workers` OpenMP threads. The first
/// exception thrown by any env is rethrown after the parallel region.
void advance_parallel(EnvBatch envs, std::span<const Command> commands, const StepContext& ctx,
                      BatchResult& out, int n_workers);

}  // namespace flightcore::kernels
