#include "flightcore/bridge/client.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>

#include <array>
#include <cstring>

#include "flightcore/errors.hpp"
#include "socket_io.hpp"

namespace flightcore::bridge {

namespace {

std::string describe(const Endpoint& e) { return e.host + ":" + std::to_string(e.port); }

}  // namespace

BridgeClient::BridgeClient(const Endpoint& endpoint) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* info = nullptr;
  const std::string port = std::to_string(endpoint.port);
  if (const int rc = ::getaddrinfo(endpoint.host.c_str(), port.c_str(), &hints, &info); rc != 0) {
    throw IoError(describe(endpoint), std::string("cannot resolve host: ") + ::gai_strerror(rc));
  }
  fd_ = ::socket(info->ai_family, info->ai_socktype, info->ai_protocol);
  if (fd_ < 0 || ::connect(fd_, info->ai_addr, info->ai_addrlen) != 0) {
    const int err = errno;
    ::freeaddrinfo(info);
    if (fd_ >= 0) ::close(fd_);
    throw IoError(describe(endpoint), std::string("connect failed: ") + std::strerror(err));
  }
  ::freeaddrinfo(info);
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

BridgeClient::~BridgeClient() {
  if (fd_ >= 0) ::close(fd_);
}

void BridgeClient::send(const Message& m) { send_raw(encode(m)); }

void BridgeClient::send_raw(std::span<const std::uint8_t> bytes) {
  static const std::atomic<bool> always{true};
  if (!detail::send_all(fd_, bytes, always)) throw IoError("bridge", "send failed");
}

std::optional<Message> BridgeClient::receive(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::array<std::uint8_t, 64 * 1024> buffer{};
  while (true) {
    if (auto frame = reader_.next()) return decode(frame->tag, frame->payload);
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    std::size_t n = 0;
    switch (detail::recv_some(fd_, buffer, static_cast<int>(left.count()), n)) {
      case detail::RecvStatus::Closed:
        throw IoError("bridge", "connection closed by server");
      case detail::RecvStatus::Timeout:
        break;
      case detail::RecvStatus::Data:
        reader_.feed(std::span<const std::uint8_t>(buffer.data(), n));
        break;
    }
  }
}

std::optional<Message> BridgeClient::receive_reply(std::uint64_t request_id,
                                                   std::chrono::steady_clock::time_point deadline) {
  while (true) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    auto m = receive(left);
    if (!m) return std::nullopt;
    const bool answers = std::visit(
        [request_id](const auto& x) {
          if constexpr (requires { x.ref_id; }) {
            return x.ref_id == request_id;
          } else {
            return false;
          }
        },
        *m);
    if (answers) return m;
  }
}

Message BridgeClient::configure(std::size_t n_envs, std::optional<double> dt,
                                std::chrono::milliseconds timeout) {
  Configure c;
  c.id = next_id();
  c.n_envs = n_envs;
  c.dt = dt;
  send(c);
  auto reply = receive_reply(c.id, std::chrono::steady_clock::now() + timeout);
  if (!reply) throw ProtocolError("no reply to configure");
  return *reply;
}

std::vector<std::uint8_t> BridgeClient::request_point_cloud(const Aabb& bounds, double resolution,
                                                            std::chrono::milliseconds timeout) {
  PointCloudRequest req;
  req.id = next_id();
  req.bounds = bounds;
  req.resolution = resolution;
  send(req);

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  ChunkAssembler assembler;
  while (!assembler.complete()) {
    auto reply = receive_reply(req.id, deadline);
    if (!reply) throw ProtocolError("timed out waiting for point cloud");
    if (const auto* err = std::get_if<ErrorReply>(&*reply)) throw ProtocolError(err->reason);
    if (auto* chunk = std::get_if<PointCloudChunk>(&*reply)) assembler.add(std::move(*chunk));
  }
  return assembler.bytes();
}

}  // namespace flightcore::bridge
