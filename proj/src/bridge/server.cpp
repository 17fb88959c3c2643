#include "flightcore/bridge/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>

#include <array>
#include <charconv>
#include <cstring>

#include "flightcore/errors.hpp"
#include "flightcore/world/ply.hpp"
#include "socket_io.hpp"

namespace flightcore::bridge {

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw ArgumentError("bridge endpoint must look like host:port, got '" + std::string(text) + "'");
  }
  Endpoint e;
  e.host = std::string(text.substr(0, colon));
  const std::string_view port = text.substr(colon + 1);
  unsigned value = 0;
  auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc{} || p != port.data() + port.size() || port.empty() || value > 65535) {
    throw ArgumentError("invalid port in bridge endpoint '" + std::string(text) + "'");
  }
  e.port = static_cast<std::uint16_t>(value);
  return e;
}

SimulationHandle::SimulationHandle(VecSimConfig config, OccupancyCloud world)
    : config_(std::move(config)), world_(std::move(world)) {
  config_.validate();
  env_ = std::make_unique<VecEnv>(config_);
  env_->reset();
}

StateUpdate SimulationHandle::snapshot_locked() const {
  StateUpdate u;
  u.sim_time = sim_time_;
  const auto& states = env_->last().states;
  u.poses.resize(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    u.poses[i].env_id = static_cast<std::uint32_t>(i);
    u.poses[i].p = states[i].p;
    u.poses[i].q = states[i].q;
  }
  return u;
}

StateUpdate SimulationHandle::step_uniform(const Command& cmd) {
  std::lock_guard lock(mutex_);
  const std::vector<Command> commands(env_->size(), cmd);
  env_->step(commands);
  sim_time_ += config_.dt;
  return snapshot_locked();
}

StateUpdate SimulationHandle::snapshot() const {
  std::lock_guard lock(mutex_);
  return snapshot_locked();
}

void SimulationHandle::configure(std::size_t n_envs, std::optional<double> dt,
                                 std::optional<std::uint64_t> params_digest) {
  std::lock_guard lock(mutex_);
  if (params_digest && *params_digest != config_.params.digest()) {
    throw ArgumentError("vehicle parameter digest mismatch");
  }
  VecSimConfig next = config_;
  next.n_envs = n_envs;
  if (dt) next.dt = *dt;
  if (!next.per_env_params.empty() && next.per_env_params.size() != n_envs) {
    next.per_env_params.clear();
  }
  next.validate();
  auto env = std::make_unique<VecEnv>(next);
  env->reset();
  config_ = std::move(next);
  env_ = std::move(env);
  sim_time_ = 0.0;
}

std::size_t SimulationHandle::n_envs() const {
  std::lock_guard lock(mutex_);
  return config_.n_envs;
}

double SimulationHandle::dt() const {
  std::lock_guard lock(mutex_);
  return config_.dt;
}

std::uint64_t SimulationHandle::params_digest() const {
  std::lock_guard lock(mutex_);
  return config_.params.digest();
}

struct BridgeServer::Connection {
  int fd = -1;
  std::mutex write_mutex;
  std::atomic<bool> alive{true};
  std::atomic<bool> finished{false};
  std::optional<std::uint64_t> last_request_id;
  std::thread thread;

  bool send(const Message& m) {
    const auto frame = encode(m);
    std::lock_guard lock(write_mutex);
    if (!alive.load()) return false;
    if (!detail::send_all(fd, frame, alive)) {
      alive = false;
      return false;
    }
    return true;
  }
};

BridgeServer::BridgeServer(Endpoint endpoint, std::shared_ptr<SimulationHandle> sim,
                           std::size_t queue_depth)
    : endpoint_(std::move(endpoint)), sim_(std::move(sim)), queue_depth_(queue_depth) {
  if (!sim_) throw ArgumentError("bridge server needs a simulation handle");
  if (queue_depth_ == 0) throw ArgumentError("queue depth must be >= 1");
}

BridgeServer::~BridgeServer() { stop(); }

void BridgeServer::start() {
  if (running_) return;
  const std::string where = endpoint_.host + ":" + std::to_string(endpoint_.port);

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* info = nullptr;
  const std::string port = std::to_string(endpoint_.port);
  if (const int rc = ::getaddrinfo(endpoint_.host.c_str(), port.c_str(), &hints, &info); rc != 0) {
    throw IoError(where, std::string("cannot resolve host: ") + ::gai_strerror(rc));
  }
  const int fd = ::socket(info->ai_family, info->ai_socktype, info->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(info);
    throw IoError(where, std::string("socket: ") + std::strerror(errno));
  }
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd, info->ai_addr, info->ai_addrlen) != 0 || ::listen(fd, 8) != 0) {
    const int err = errno;
    ::freeaddrinfo(info);
    ::close(fd);
    throw IoError(where, std::string("bind failed: ") + std::strerror(err));
  }
  ::freeaddrinfo(info);

  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
  bound_port_ = ntohs(bound.sin_port);
  listen_fd_ = fd;

  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
  publish_thread_ = std::thread([this] { publish_loop(); });
}

void BridgeServer::stop() {
  if (!running_.exchange(false)) return;
  queue_cv_.notify_all();
  if (accept_thread_.joinable()) accept_thread_.join();
  if (publish_thread_.joinable()) publish_thread_.join();

  std::list<std::shared_ptr<Connection>> clients;
  {
    std::lock_guard lock(clients_mutex_);
    clients.swap(clients_);
  }
  for (auto& c : clients) {
    c->alive = false;
    if (c->thread.joinable()) c->thread.join();
    ::close(c->fd);
  }
  ::close(listen_fd_);
  listen_fd_ = -1;
}

void BridgeServer::reap_finished() {
  std::list<std::shared_ptr<Connection>> done;
  {
    std::lock_guard lock(clients_mutex_);
    for (auto it = clients_.begin(); it != clients_.end();) {
      if ((*it)->finished) {
        done.push_back(*it);
        it = clients_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& c : done) {
    if (c->thread.joinable()) c->thread.join();
    ::close(c->fd);
  }
}

void BridgeServer::accept_loop() {
  while (running_) {
    reap_finished();
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, detail::kPollSliceMs) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);

    auto conn = std::make_shared<Connection>();
    conn->fd = fd;
    if (client_count() >= kMaxClients) {
      conn->send(ErrorReply{next_id(), 0, "server full"});
      ::close(fd);
      continue;
    }
    {
      std::lock_guard lock(queue_mutex_);
      ++stats_.clients_accepted;
    }
    std::lock_guard lock(clients_mutex_);
    clients_.push_back(conn);
    conn->thread = std::thread([this, conn] { serve_connection(conn); });
  }
}

void BridgeServer::publish(StateUpdate update) {
  {
    std::lock_guard lock(queue_mutex_);
    ++stats_.published;
    if (queue_.size() >= queue_depth_) {
      queue_.pop_front();
      ++stats_.dropped;
    }
    queue_.push_back(std::move(update));
  }
  queue_cv_.notify_one();
}

void BridgeServer::publish_loop() {
  while (true) {
    StateUpdate update;
    {
      std::unique_lock lock(queue_mutex_);
      queue_cv_.wait(lock, [this] { return !running_ || !queue_.empty(); });
      if (!running_) return;
      update = std::move(queue_.front());
      queue_.pop_front();
      ++stats_.dequeued;
    }
    update.id = next_id();
    std::vector<std::shared_ptr<Connection>> targets;
    {
      std::lock_guard lock(clients_mutex_);
      for (const auto& c : clients_) {
        if (c->alive) targets.push_back(c);
      }
    }
    for (const auto& c : targets) c->send(update);
  }
}

BridgeStats BridgeServer::stats() const {
  std::lock_guard lock(queue_mutex_);
  BridgeStats s = stats_;
  s.queued = queue_.size();
  s.frames_rejected = frames_rejected_.load();
  return s;
}

std::size_t BridgeServer::client_count() const {
  std::lock_guard lock(clients_mutex_);
  std::size_t n = 0;
  for (const auto& c : clients_) n += c->finished ? 0 : 1;
  return n;
}

void BridgeServer::reply_error(Connection& conn, std::uint64_t ref_id, const std::string& reason) {
  ++frames_rejected_;
  conn.send(ErrorReply{next_id(), ref_id, reason});
}

void BridgeServer::serve_connection(const std::shared_ptr<Connection>& conn) {
  FrameReader reader;
  std::array<std::uint8_t, 64 * 1024> buffer{};
  while (running_ && conn->alive) {
    std::size_t n = 0;
    const auto status = detail::recv_some(conn->fd, buffer, detail::kPollSliceMs, n);
    if (status == detail::RecvStatus::Closed) break;
    if (status == detail::RecvStatus::Timeout) continue;
    reader.feed(std::span<const std::uint8_t>(buffer.data(), n));
    while (conn->alive) {
      std::optional<FrameReader::Frame> frame;
      try {
        frame = reader.next();
      } catch (const ProtocolError& e) {
        reply_error(*conn, 0, e.reason());
        continue;
      }
      if (!frame) break;
      handle_frame(*conn, *frame);
    }
  }
  conn->alive = false;
  conn->finished = true;
}

void BridgeServer::handle_frame(Connection& conn, const FrameReader::Frame& frame) {
  std::uint64_t ref_id = 0;
  if (frame.payload.size() >= sizeof ref_id) {
    std::memcpy(&ref_id, frame.payload.data(), sizeof ref_id);
  }
  Message message;
  try {
    message = decode(frame.tag, frame.payload);
  } catch (const ProtocolError& e) {
    reply_error(conn, ref_id, e.reason());
    return;
  }
  if (conn.last_request_id && ref_id <= *conn.last_request_id) {
    reply_error(conn, ref_id, "message id not increasing");
    return;
  }
  conn.last_request_id = ref_id;

  try {
    if (const auto* hello = std::get_if<Hello>(&message)) {
      if (hello->version != kProtocolVersion) {
        reply_error(conn, ref_id, "unsupported protocol version");
        return;
      }
      conn.send(Hello{next_id(), kProtocolVersion});
    } else if (const auto* cfg = std::get_if<Configure>(&message)) {
      sim_->configure(cfg->n_envs, cfg->dt, cfg->params_digest);
      conn.send(Ack{next_id(), ref_id});
    } else if (const auto* req = std::get_if<PointCloudRequest>(&message)) {
      const auto ply = serialize_ply(sim_->world().crop(req->bounds, req->resolution));
      for (auto& chunk : make_chunks(ply, ref_id, 0)) {
        chunk.id = next_id();
        if (!conn.send(chunk)) return;
      }
    } else {
      reply_error(conn, ref_id, "unexpected message from client");
    }
  } catch (const std::exception& e) {
    reply_error(conn, ref_id, e.what());
  }
}

}  // namespace flightcore::bridge
