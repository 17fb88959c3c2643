#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <list>
#include <memory>
#include <mutex>
#include <condition_variable>
#include <optional>
#include <string>
#include <thread>

#include "flightcore/bridge/protocol.hpp"
#include "flightcore/env/vec_env.hpp"
#include "flightcore/world/occupancy_cloud.hpp"

namespace flightcore::bridge {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// "host:port"; port 0 asks the OS for a free port. Throws ArgumentError.
Endpoint parse_endpoint(std::string_view text);

/// The simulation a bridge server exposes: a vectorized environment plus the
/// world it flies in. Every method is safe to call from the simulation loop
/// and the server threads concurrently.
class SimulationHandle {
 public:
  SimulationHandle(VecSimConfig config, OccupancyCloud world);

  /// Steps every env with `cmd` and returns the resulting poses.
  StateUpdate step_uniform(const Command& cmd);
  /// Current poses without stepping.
  StateUpdate snapshot() const;

  /// Rebuilds the environment with `n_envs` vehicles (and `dt` if given).
  /// Throws ArgumentError if `params_digest` does not match the vehicle
  /// parameters in use.
  void configure(std::size_t n_envs, std::optional<double> dt,
                 std::optional<std::uint64_t> params_digest);

  std::size_t n_envs() const;
  double dt() const;
  std::uint64_t params_digest() const;
  const OccupancyCloud& world() const { return world_; }

 private:
  StateUpdate snapshot_locked() const;

  mutable std::mutex mutex_;
  VecSimConfig config_;
  std::unique_ptr<VecEnv> env_;
  double sim_time_ = 0.0;
  const OccupancyCloud world_;
};

struct BridgeStats {
  std::uint64_t published = 0;  // StateUpdates handed to publish()
  std::uint64_t dropped = 0;    // evicted from a full queue, never sent
  std::uint64_t dequeued = 0;   // taken off the queue by the publisher
  std::uint64_t queued = 0;     // waiting at the time of the snapshot
  std::uint64_t frames_rejected = 0;
  std::uint64_t clients_accepted = 0;
};

/// TCP server speaking the bridge protocol. At most two clients (a renderer
/// and a logger) are attached at once; further connections receive an
/// Error and are closed.
///
/// publish() never blocks: updates go to a bounded queue that evicts the
/// oldest entry when full, and a publisher thread fans them out.
class BridgeServer {
 public:
  static constexpr std::size_t kDefaultQueueDepth = 8;
  static constexpr std::size_t kMaxClients = 2;

  BridgeServer(Endpoint endpoint, std::shared_ptr<SimulationHandle> sim,
               std::size_t queue_depth = kDefaultQueueDepth);
  ~BridgeServer();
  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  /// Binds and starts serving. Throws IoError if the endpoint cannot be bound.
  void start();
  void stop();
  bool running() const { return running_.load(); }
  /// Bound port (the OS-assigned one when the endpoint asked for port 0).
  std::uint16_t port() const { return bound_port_; }

  void publish(StateUpdate update);
  BridgeStats stats() const;
  std::size_t client_count() const;

 private:
  struct Connection;

  void accept_loop();
  void publish_loop();
  void serve_connection(const std::shared_ptr<Connection>& conn);
  void handle_frame(Connection& conn, const FrameReader::Frame& frame);
  void reply_error(Connection& conn, std::uint64_t ref_id, const std::string& reason);
  std::uint64_t next_id() { return next_id_.fetch_add(1) + 1; }
  void reap_finished();

  Endpoint endpoint_;
  std::shared_ptr<SimulationHandle> sim_;
  const std::size_t queue_depth_;

  int listen_fd_ = -1;
  std::uint16_t bound_port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<std::uint64_t> next_id_{0};

  std::thread accept_thread_;
  std::thread publish_thread_;

  mutable std::mutex clients_mutex_;
  std::list<std::shared_ptr<Connection>> clients_;

  mutable std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::deque<StateUpdate> queue_;
  BridgeStats stats_;
  std::atomic<std::uint64_t> frames_rejected_{0};
};

}  // namespace flightcore::bridge
