#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "flightcore/env/vec_env.hpp"
#include "flightcore/tasks/tasks.hpp"

namespace flightcore::cli {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable consulted when --bridge is not given.
inline constexpr const char* kBridgeEnvVar = "FLIGHTCORE_BRIDGE";

/// Parses `args` (without the program name) and runs the subcommand.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

struct BenchRow {
  std::size_t n_envs = 0;
  int n_workers = 0;
  double dt = 0.0;
  Integrator method = Integrator::RK4;
  double steps_per_second = 0.0;  // env-steps per wall-clock second
};

/// Steps `n_envs` vehicles with uniformly random rotor thrusts, drawn
/// fresh every step, for `duration` seconds of wall clock. Vehicles are
/// reset to hover every `reset_every` steps. Only time spent inside
/// VecEnv::step counts towards the rate.
BenchRow measure_throughput(VecSimConfig config, double duration, std::size_t reset_every = 250);

/// Every (n_envs, n_workers) pair in order, n_envs varying slowest.
std::vector<BenchRow> run_bench(const VecSimConfig& base, const std::vector<std::size_t>& envs,
                                const std::vector<int>& workers, double duration);

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);

struct EpisodeSummary {
  double total_reward = 0.0;
  std::size_t steps = 0;
  std::string reason;
};

struct RunOptions {
  TaskSpec task = TaskSpec::stabilize();
  VecSimConfig sim;               // n_envs is forced to 1
  std::string controller = "hover";  // hover | random | external
  std::size_t episodes = 1;
  std::uint64_t seed = 0;
  bool start_at_target = false;   // exact hover at the task target
  std::istream* actions = nullptr;  // required for the external controller
};

/// Runs whole episodes on a single environment. Identical options give
/// identical summaries. Throws ArgumentError for an unknown controller.
std::vector<EpisodeSummary> run_episodes(const RunOptions& options);

}  // namespace flightcore::cli
