#pragma once

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstdint>
#include <span>

namespace flightcore::bridge::detail {

inline constexpr int kPollSliceMs = 50;

/// Writes every byte unless the peer goes away or `keep_going` turns false.
inline bool send_all(int fd, std::span<const std::uint8_t> bytes,
                     const std::atomic<bool>& keep_going) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    if (!keep_going.load()) return false;
    pollfd p{fd, POLLOUT, 0};
    const int r = ::poll(&p, 1, kPollSliceMs);
    if (r < 0 && errno != EINTR) return false;
    if (r <= 0) continue;
    if (p.revents & (POLLERR | POLLHUP | POLLNVAL)) return false;
    const ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN || errno == EWOULDBLOCK) continue;
      return false;
    }
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

enum class RecvStatus { Data, Timeout, Closed };

/// Waits up to `timeout_ms` for readable data; `received` holds the count.
inline RecvStatus recv_some(int fd, std::span<std::uint8_t> buffer, int timeout_ms,
                            std::size_t& received) {
  received = 0;
  pollfd p{fd, POLLIN, 0};
  const int r = ::poll(&p, 1, timeout_ms);
  if (r < 0) return errno == EINTR ? RecvStatus::Timeout : RecvStatus::Closed;
  if (r == 0) return RecvStatus::Timeout;
  const ssize_t n = ::recv(fd, buffer.data(), buffer.size(), 0);
  if (n < 0) {
    return (errno == EINTR || errno == EAGAIN) ? RecvStatus::Timeout : RecvStatus::Closed;
  }
  if (n == 0) return RecvStatus::Closed;
  received = static_cast<std::size_t>(n);
  return RecvStatus::Data;
}

}  // namespace flightcore::bridge::detail
