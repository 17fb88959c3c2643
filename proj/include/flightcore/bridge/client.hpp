#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "flightcore/bridge/protocol.hpp"
#include "flightcore/bridge/server.hpp"

namespace flightcore::bridge {

/// Minimal blocking client, standing in for an external renderer or logger.
class BridgeClient {
 public:
  /// Connects to `endpoint`. Throws IoError on failure.
  explicit BridgeClient(const Endpoint& endpoint);
  ~BridgeClient();
  BridgeClient(const BridgeClient&) = delete;
  BridgeClient& operator=(const BridgeClient&) = delete;

  /// Fresh, strictly increasing request id.
  std::uint64_t next_id() { return ++last_id_; }

  void send(const Message& m);
  /// Writes bytes verbatim, for exercising malformed input.
  void send_raw(std::span<const std::uint8_t> bytes);

  /// Next decoded message, or nullopt if none arrives within `timeout`.
  /// Throws IoError once the server has closed the connection.
  std::optional<Message> receive(std::chrono::milliseconds timeout);

  /// Next message of type T, skipping anything else (such as StateUpdates).
  template <typename T>
  std::optional<T> receive_as(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return std::nullopt;
      auto m = receive(left);
      if (!m) return std::nullopt;
      if (auto* t = std::get_if<T>(&*m)) return std::move(*t);
    }
  }

  /// Sends a Configure and waits for its Ack or Error reply.
  Message configure(std::size_t n_envs, std::optional<double> dt, std::chrono::milliseconds timeout);

  /// Requests the world inside `bounds` and returns the reassembled PLY
  /// bytes. Throws ProtocolError on an Error reply or timeout.
  std::vector<std::uint8_t> request_point_cloud(const Aabb& bounds, double resolution,
                                                std::chrono::milliseconds timeout);

 private:
  /// Next message whose ref_id answers `request_id` (Ack, Error or chunk).
  std::optional<Message> receive_reply(std::uint64_t request_id,
                                       std::chrono::steady_clock::time_point deadline);

  int fd_ = -1;
  std::uint64_t last_id_ = 0;
  FrameReader reader_;
};

}  // namespace flightcore::bridge
