#include "flightcore/cli/commands.hpp"

#include <array>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "flightcore/bridge/server.hpp"
#include "flightcore/errors.hpp"
#include "flightcore/rng.hpp"
#include "flightcore/tasks/scripted_controllers.hpp"
#include "flightcore/world/forest.hpp"
#include "flightcore/world/planner.hpp"
#include "flightcore/world/ply.hpp"

namespace flightcore::cli {

namespace {

constexpr std::uint64_t kControllerStream = 1ull << 40;
constexpr std::uint64_t kBenchActionStream = 1ull << 41;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Vec3 to_vec3(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

/// Reads one action (spec.action_dim() numbers) per step from a stream.
class StreamController final : public ScriptedController {
 public:
  explicit StreamController(std::istream& in) : in_(in) {}
  void act(const QuadState&, const TaskSpec&, RngStream&, std::span<double> action) override {
    for (double& a : action) {
      if (!(in_ >> a)) {
        throw std::runtime_error("external controller: expected " + std::to_string(action.size()) +
                                 " action values per step on stdin");
      }
    }
  }

 private:
  std::istream& in_;
};

std::unique_ptr<ScriptedController> controller_for(const RunOptions& o) {
  if (o.controller == "external") {
    if (!o.actions) throw ArgumentError("external controller needs an action stream");
    return std::make_unique<StreamController>(*o.actions);
  }
  return make_controller(o.controller, o.sim.params, o.sim.gains);
}

/// Shared world options for `world`, `plan` and `serve`.
struct WorldFlags {
  std::array<double, 3> extent{50.0, 50.0, 10.0};
  double resolution = 0.1;
  double density = 0.2;
  std::string ply_path;

  void add_generation(CLI::App* cmd) {
    cmd->add_option("--extent", extent, "World size x y z [m], anchored at the origin");
    cmd->add_option("--resolution", resolution, "Occupancy resolution [m]")->check(CLI::PositiveNumber);
    cmd->add_option("--density", density, "Ground fraction covered by trunks")->check(CLI::Range(0.0, 1.0));
  }

  OccupancyCloud make(std::uint64_t seed) const {
    if (!ply_path.empty()) return import_ply(ply_path, resolution);
    const Aabb bounds{Vec3::Zero(), to_vec3(extent)};
    return generate_forest(bounds, resolution, density, seed);
  }
};

/// Flags shared by the simulating subcommands; explicit flags win over
/// the config file, which wins over built-in defaults.
struct SimFlags {
  std::string config_path;
  std::optional<std::size_t> n_envs;
  std::optional<double> dt;
  std::optional<std::string> method;
  std::optional<std::uint64_t> seed;

  void add(CLI::App* cmd, bool with_envs) {
    cmd->add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    if (with_envs) cmd->add_option("--envs", n_envs, "Number of environments")->check(CLI::PositiveNumber);
    cmd->add_option("--dt", dt, "Integration step [s]")->check(CLI::PositiveNumber);
    cmd->add_option("--method", method, "Integrator: euler | rk4");
    cmd->add_option("--seed", seed, "Base seed");
  }

  KeyValueConfig file() const {
    return config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_path);
  }

  VecSimConfig sim(const KeyValueConfig& cfg) const {
    VecSimConfig c = load_vec_config(cfg);
    if (n_envs) c.n_envs = *n_envs;
    if (dt) c.dt = *dt;
    if (method) c.method = parse_integrator(*method);
    if (seed) c.base_seed = *seed;
    return c;
  }
};

int bench_command(const std::vector<std::size_t>& envs, const std::vector<int>& workers,
                  double duration, const SimFlags& flags, const std::string& out_path,
                  std::ostream& out) {
  if (!(duration > 0.0)) throw ArgumentError("--duration must be > 0");
  const VecSimConfig base = flags.sim(flags.file());
  const auto rows = run_bench(base, envs, workers, duration);

  if (out_path.empty()) {
    write_bench_csv(rows, out);
  } else {
    std::ofstream file(out_path);
    if (!file) throw IoError(out_path, "cannot open for writing");
    write_bench_csv(rows, file);
  }
  const auto peak = std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.steps_per_second < b.steps_per_second;
  });
  if (peak != rows.end()) {
    out << "# peak " << std::fixed << std::setprecision(0) << peak->steps_per_second
        << " steps/s at n_envs=" << peak->n_envs << " n_workers=" << peak->n_workers << "\n";
  }
  return kExitOk;
}

int run_command(RunOptions options, const SimFlags& flags, const std::optional<std::string>& task,
                std::ostream& out) {
  KeyValueConfig cfg = flags.file();
  if (task) cfg.set("task", *task);
  options.sim = flags.sim(cfg);
  options.task = load_task_spec(cfg);
  options.task.dt = options.sim.dt;
  options.seed = options.sim.base_seed;

  const auto episodes = run_episodes(options);
  out << "episode,return,steps,reason\n";
  out << std::setprecision(10);
  double sum = 0.0;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    out << i << "," << episodes[i].total_reward << "," << episodes[i].steps << ","
        << episodes[i].reason << "\n";
    sum += episodes[i].total_reward;
  }
  if (!episodes.empty()) {
    out << "# mean_return " << sum / static_cast<double>(episodes.size()) << "\n";
  }
  return kExitOk;
}

int world_command(const WorldFlags& world, std::uint64_t seed, const std::string& out_path,
                  std::ostream& out) {
  const OccupancyCloud cloud = world.make(seed);
  const std::size_t bytes = export_ply(cloud, out_path);
  out << "points " << cloud.size() << "\n"
      << "ground_coverage " << std::setprecision(4) << ground_coverage(cloud) << "\n"
      << "bytes " << bytes << "\n";
  return kExitOk;
}

int plan_command(const WorldFlags& world, std::uint64_t seed, const PathQuery& query,
                 const std::string& out_path, std::ostream& out, std::ostream& err) {
  const OccupancyCloud cloud = world.make(seed);
  const PlanResult result = plan_path(cloud, query, seed);
  out << "found " << (result.found ? 1 : 0) << "\n"
      << "iterations " << result.iterations << "\n"
      << "elapsed_seconds " << std::setprecision(4) << result.elapsed_seconds << "\n";
  if (!result.found) {
    err << "error: no path found within " << query.time_budget << " s\n";
    return kExitRuntimeError;
  }
  out << "length " << path_length(result.path) << "\n";

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw IoError(out_path, "cannot open for writing");
  }
  std::ostream& csv = out_path.empty() ? out : file;
  csv << "x,y,z\n" << std::setprecision(10);
  for (const auto& p : result.path) csv << p.x() << "," << p.y() << "," << p.z() << "\n";
  return kExitOk;
}

int serve_command(const WorldFlags& world, const SimFlags& flags, std::string endpoint_text,
                  double duration, std::ostream& out) {
  if (!(duration > 0.0)) throw ArgumentError("--duration must be > 0");
  if (endpoint_text.empty()) {
    const char* env = std::getenv(kBridgeEnvVar);
    endpoint_text = env ? env : "127.0.0.1:5555";
  }
  const bridge::Endpoint endpoint = bridge::parse_endpoint(endpoint_text);
  const VecSimConfig config = flags.sim(flags.file());
  auto sim = std::make_shared<bridge::SimulationHandle>(config, world.make(config.base_seed));

  bridge::BridgeServer server(endpoint, sim);
  server.start();
  out << "serving on " << endpoint.host << ":" << server.port() << std::endl;

  const BodyRateCmd hover{config.params.gravity, Vec3::Zero()};
  const auto t0 = Clock::now();
  std::uint64_t steps = 0;
  while (seconds_since(t0) < duration) {
    server.publish(sim->step_uniform(hover));
    ++steps;
    const auto due = t0 + std::chrono::duration_cast<Clock::duration>(
                              std::chrono::duration<double>(static_cast<double>(steps) * sim->dt()));
    std::this_thread::sleep_until(due);
  }
  server.stop();
  const auto s = server.stats();
  out << "steps " << steps << "\n"
      << "published " << s.published << "\n"
      << "dropped " << s.dropped << "\n"
      << "clients " << s.clients_accepted << "\n";
  return kExitOk;
}

}  // namespace

BenchRow measure_throughput(VecSimConfig config, double duration, std::size_t reset_every) {
  if (!(duration > 0.0)) throw ArgumentError("duration must be > 0");
  if (reset_every == 0) throw ArgumentError("reset_every must be >= 1");
  config.validate();

  RngStream rng = derive_stream(config.base_seed, kBenchActionStream);
  std::uniform_real_distribution<double> thrust(config.params.thrust_min, config.params.thrust_max);
  std::vector<Command> commands(config.n_envs);

  VecEnv env(config);
  const InitSampler hover = InitSampler::hover_at(InitSampler{}.position_center);
  env.reset(hover);

  std::size_t steps = 0;
  double stepping = 0.0;
  const auto t0 = Clock::now();
  while (seconds_since(t0) < duration) {
    for (auto& c : commands) {
      c = RotorThrustCmd{Vec4(thrust(rng), thrust(rng), thrust(rng), thrust(rng))};
    }
    const auto s0 = Clock::now();
    env.step(commands);
    stepping += seconds_since(s0);
    ++steps;
    if (steps % reset_every == 0) env.reset(hover);
  }

  BenchRow row;
  row.n_envs = config.n_envs;
  row.n_workers = config.n_workers;
  row.dt = config.dt;
  row.method = config.method;
  row.steps_per_second =
      stepping > 0.0 ? static_cast<double>(steps * config.n_envs) / stepping : 0.0;
  return row;
}

std::vector<BenchRow> run_bench(const VecSimConfig& base, const std::vector<std::size_t>& envs,
                                const std::vector<int>& workers, double duration) {
  std::vector<BenchRow> rows;
  for (const std::size_t n : envs) {
    for (const int w : workers) {
      VecSimConfig c = base;
      c.n_envs = n;
      c.n_workers = w;
      c.per_env_params.clear();
      rows.push_back(measure_throughput(c, duration));
    }
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "n_envs,n_workers,dt,method,steps_per_second\n";
  for (const auto& r : rows) {
    out << r.n_envs << "," << r.n_workers << "," << r.dt << "," << to_string(r.method) << ","
        << std::fixed << std::setprecision(1) << r.steps_per_second << std::defaultfloat << "\n";
  }
}

std::vector<EpisodeSummary> run_episodes(const RunOptions& options) {
  auto controller = controller_for(options);
  if (options.episodes == 0) return {};

  VecSimConfig sim = options.sim;
  sim.n_envs = 1;
  sim.per_env_params.clear();
  sim.base_seed = options.seed;
  VecEnv env(sim, options.task);
  if (options.start_at_target) {
    InitSampler at_target = InitSampler::hover_at(options.task.p_target);
    at_target.euler_center = options.task.theta_target;
    env.reset(at_target);
  } else {
    env.reset();
  }

  RngStream rng = derive_stream(options.seed, kControllerStream);
  std::vector<double> action(options.task.action_dim());
  std::vector<EpisodeSummary> summaries;
  summaries.reserve(options.episodes);
  while (summaries.size() < options.episodes) {
    EpisodeSummary episode;
    while (true) {
      controller->act(env.last().states[0], options.task, rng, action);
      const BatchResult& r = env.step_actions(action);
      episode.total_reward += r.rewards[0];
      ++episode.steps;
      if (r.done[0]) {
        episode.reason = std::string(r.flags[0].reason());
        break;
      }
    }
    summaries.push_back(std::move(episode));
  }
  return summaries;
}

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"flightcore: vectorized quadrotor simulation", "flightcore"};
  app.require_subcommand(1);

  SimFlags bench_sim;
  std::vector<std::size_t> bench_envs{1, 10, 150};
  std::vector<int> bench_workers{1};
  double bench_duration = 1.0;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Measure stepping throughput as CSV");
  bench_sim.add(bench, false);
  bench->add_option("--envs", bench_envs, "Environment counts, comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  bench->add_option("--workers", bench_workers, "Worker counts, comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  bench->add_option("--duration", bench_duration, "Seconds per configuration");
  bench->add_option("--out", bench_out, "Write the CSV here instead of stdout");

  SimFlags run_sim;
  RunOptions run_opts;
  std::optional<std::string> run_task;
  auto* run = app.add_subcommand("run", "Run episodes with a scripted controller");
  run_sim.add(run, false);
  run->add_option("--task", run_task, "stabilize | motor_failure | gate");
  run->add_option("--controller", run_opts.controller, "hover | random | external");
  run->add_option("--episodes", run_opts.episodes, "Number of episodes");
  run->add_flag("--start-at-target", run_opts.start_at_target,
                "Start every episode in exact hover at the target");

  WorldFlags world_flags;
  std::uint64_t world_seed = 0;
  std::string world_out;
  auto* world = app.add_subcommand("world", "Generate a forest and export it as PLY");
  world_flags.add_generation(world);
  world->add_option("--seed", world_seed, "Forest seed");
  world->add_option("--out", world_out, "Destination .ply")->required();

  WorldFlags plan_world;
  std::uint64_t plan_seed = 0;
  std::array<double, 3> start{}, goal{};
  PathQuery query;
  std::string plan_out;
  auto* plan = app.add_subcommand("plan", "Plan a collision-free path through a world");
  plan_world.add_generation(plan);
  plan->add_option("--world", plan_world.ply_path, "PLY world (default: generate a forest)")
      ->check(CLI::ExistingFile);
  plan->add_option("--seed", plan_seed, "Forest and planner seed");
  plan->add_option("--start", start, "Start x y z [m]")->required();
  plan->add_option("--goal", goal, "Goal x y z [m]")->required();
  plan->add_option("--radius", query.robot_radius, "Robot radius [m]")->check(CLI::NonNegativeNumber);
  plan->add_option("--budget", query.time_budget, "Wall-clock budget [s]")->check(CLI::PositiveNumber);
  plan->add_option("--out", plan_out, "Write waypoints CSV here instead of stdout");

  WorldFlags serve_world;
  SimFlags serve_sim;
  std::string serve_bridge;
  double serve_duration = 10.0;
  auto* serve = app.add_subcommand("serve", "Simulate in real time and publish over the bridge");
  serve_world.add_generation(serve);
  serve_sim.add(serve, true);
  serve->add_option("--world", serve_world.ply_path, "PLY world (default: generate a forest)")
      ->check(CLI::ExistingFile);
  serve->add_option("--bridge", serve_bridge,
                    std::string("host:port (default: $") + kBridgeEnvVar + " or 127.0.0.1:5555)");
  serve->add_option("--duration", serve_duration, "Seconds to serve");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (bench->parsed()) {
      return bench_command(bench_envs, bench_workers, bench_duration, bench_sim, bench_out, out);
    }
    if (run->parsed()) {
      run_opts.actions = &in;
      return run_command(run_opts, run_sim, run_task, out);
    }
    if (world->parsed()) return world_command(world_flags, world_seed, world_out, out);
    if (plan->parsed()) {
      query.start = to_vec3(start);
      query.goal = to_vec3(goal);
      return plan_command(plan_world, plan_seed, query, plan_out, out, err);
    }
    if (serve->parsed()) {
      return serve_command(serve_world, serve_sim, serve_bridge, serve_duration, out);
    }
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitUsage;
}

}  // namespace flightcore::cli
