#include "flightcore/env/vec_env.hpp"

#include <chrono>

#include "flightcore/env/kernels.hpp"
#include "flightcore/errors.hpp"

namespace flightcore {

void VecSimConfig::validate() const {
  if (n_envs < 1) throw ArgumentError("n_envs must be >= 1");
  if (n_workers < 1) throw ArgumentError("n_workers must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ArgumentError("dt must be > 0");
  params.validate();
  if (!per_env_params.empty()) {
    if (per_env_params.size() != n_envs) {
      throw ArgumentError("per_env_params must be empty or hold n_envs entries");
    }
    for (const auto& p : per_env_params) p.validate();
  }
  gains.validate();
  imu.validate();
}

VecSimConfig load_vec_config(const KeyValueConfig& cfg, VecSimConfig c) {
  const long long n_envs = cfg.get_int("n_envs", static_cast<long long>(c.n_envs));
  const long long n_workers = cfg.get_int("n_workers", c.n_workers);
  if (n_envs < 1 || n_workers < 1) throw ConfigurationError("n_envs and n_workers must be >= 1");
  c.n_envs = static_cast<std::size_t>(n_envs);
  c.n_workers = static_cast<int>(n_workers);
  c.dt = cfg.get_double("dt", c.dt);
  if (auto m = cfg.get("method")) c.method = parse_integrator(*m);
  c.base_seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(c.base_seed)));
  c.params = load_quad_params(cfg, c.params);
  c.gains = load_rate_gains(cfg, c.gains);
  c.imu = load_imu_noise(cfg, c.imu);
  c.validate();
  return c;
}

void BatchResult::resize(std::size_t n, std::size_t dim) {
  states.resize(n);
  imu.resize(n);
  done.assign(n, 0);
  flags.assign(n, TerminationFlags{});
  rewards.assign(n, 0.0);
  obs_dim = dim;
  observations.assign(n * dim, 0.0);
  terminal_observations.assign(n * dim, 0.0);
}

VecEnv::VecEnv(VecSimConfig config, std::optional<TaskSpec> task,
               std::shared_ptr<const DynamicsModel> dynamics)
    : config_(std::move(config)), task_(std::move(task)), dynamics_(std::move(dynamics)) {
  config_.validate();
  if (task_) {
    task_->validate();
    if (task_->dt != config_.dt) {
      throw ArgumentError("task dt (" + std::to_string(task_->dt) + ") differs from simulator dt (" +
                          std::to_string(config_.dt) + ")");
    }
    sampler_ = task_->sampler;
  }
  if (!dynamics_) dynamics_ = std::make_shared<ClassicalQuadDynamics>();
  states_.resize(config_.n_envs);
  streams_.resize(config_.n_envs);
  decoded_.resize(config_.n_envs);
  result_.resize(config_.n_envs, task_ ? task_->observation_dim() : 0);
}

const BatchResult& VecEnv::reset() { return reset(task_ ? task_->sampler : sampler_); }

const BatchResult& VecEnv::reset(const InitSampler& sampler) {
  sampler.validate();
  sampler_ = sampler;
  result_.resize(config_.n_envs, result_.obs_dim);
  for (std::size_t i = 0; i < config_.n_envs; ++i) {
    const QuadParams& params =
        config_.per_env_params.empty() ? config_.params : config_.per_env_params[i];
    streams_[i] = derive_stream(config_.base_seed, i);
    QuadState s = sample_state(sampler_, params, streams_[i]);
    if (task_ && task_->kind == TaskKind::MotorFailure) s.f[task_->failed_rotor] = 0.0;
    states_[i] = s;
    result_.states[i] = s;
    result_.imu[i] =
        imu_measure(s, detail::derivative_unchecked(s, params, s.f), params, config_.imu, streams_[i]);
    if (task_) {
      observe_into(s, *task_, std::span<double>(result_.observations.data() + i * result_.obs_dim,
                                                result_.obs_dim));
    }
  }
  ready_ = true;
  return result_;
}

void VecEnv::check_ready() const {
  if (!ready_) throw ArgumentError("VecEnv::step called before reset");
}

const BatchResult& VecEnv::step(std::span<const Command> commands) {
  check_ready();
  if (commands.size() != config_.n_envs) {
    throw ArgumentError("expected " + std::to_string(config_.n_envs) + " commands, got " +
                        std::to_string(commands.size()));
  }
  const kernels::StepContext ctx{&config_, task_ ? &*task_ : nullptr, &sampler_, dynamics_.get()};
  const kernels::EnvBatch envs{states_, streams_};

  const auto t0 = std::chrono::steady_clock::now();
  if (kernel_ == Kernel::SerialReference) {
    kernels::advance_serial(envs, commands, ctx, result_);
  } else {
    kernels::advance_parallel(envs, commands, ctx, result_, config_.n_workers);
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result_.steps_per_second = elapsed > 0.0 ? static_cast<double>(config_.n_envs) / elapsed : 0.0;
  return result_;
}

const BatchResult& VecEnv::step_actions(std::span<const double> actions) {
  if (!task_) throw ArgumentError("step_actions requires a task");
  const std::size_t dim = task_->action_dim();
  if (actions.size() != config_.n_envs * dim) {
    throw ArgumentError("expected " + std::to_string(config_.n_envs) + " x " + std::to_string(dim) +
                        " actions, got " + std::to_string(actions.size()));
  }
  for (std::size_t i = 0; i < config_.n_envs; ++i) {
    decoded_[i] = decode_action(actions.subspan(i * dim, dim), *task_);
  }
  return step(decoded_);
}

void VecEnv::set_workers(int n_workers) {
  if (n_workers < 1) throw ArgumentError("n_workers must be >= 1");
  config_.n_workers = n_workers;
}

std::uint64_t VecEnv::batch_hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (const auto& s : states_) h = state_hash(s, h);
  return h;
}

}  // namespace flightcore
