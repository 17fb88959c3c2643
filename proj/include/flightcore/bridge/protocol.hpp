#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "flightcore/dynamics/quad_state.hpp"
#include "flightcore/world/occupancy_cloud.hpp"

namespace flightcore::bridge {

// Wire format (all integers and floats little-endian):
//
//   u32 payload_length | u8 tag | payload[payload_length]
//
// Every payload starts with the sender's u64 message id. Requests from a
// client must carry strictly increasing ids.
//
//   tag 0 Hello              id u64, version u16
//   tag 1 StateUpdate        id u64, sim_time f64, count u32,
//                            count x (env_id u32, p 3xf64, q wxyz 4xf64)
//   tag 2 Configure          id u64, UTF-8 "key=value\n" lines
//                            (n_envs required; dt and params_digest,
//                            16 hex digits, optional)
//   tag 3 PointCloudRequest  id u64, min 3xf64, max 3xf64, resolution f64
//   tag 4 PointCloudChunk    id u64, ref_id u64, index u32, total u32, bytes
//   tag 5 Ack                id u64, ref_id u64
//   tag 6 Error              id u64, ref_id u64, UTF-8 reason
inline constexpr std::uint16_t kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxPayload = 16u << 20;
inline constexpr std::size_t kChunkBytes = 64u << 10;

enum class Tag : std::uint8_t {
  Hello = 0,
  StateUpdate = 1,
  Configure = 2,
  PointCloudRequest = 3,
  PointCloudChunk = 4,
  Ack = 5,
  Error = 6,
};

struct Hello {
  std::uint64_t id = 0;
  std::uint16_t version = kProtocolVersion;
};

struct PoseEntry {
  std::uint32_t env_id = 0;
  Vec3 p = Vec3::Zero();
  Quat q = Quat::Identity();
};

struct StateUpdate {
  std::uint64_t id = 0;
  double sim_time = 0.0;
  std::vector<PoseEntry> poses;
};

struct Configure {
  std::uint64_t id = 0;
  std::size_t n_envs = 1;
  std::optional<double> dt;  // keeps the current step when absent
  std::optional<std::uint64_t> params_digest;
};

struct PointCloudRequest {
  std::uint64_t id = 0;
  Aabb bounds;
  double resolution = 0.1;
};

struct PointCloudChunk {
  std::uint64_t id = 0;
  std::uint64_t ref_id = 0;
  std::uint32_t index = 0;
  std::uint32_t total = 0;
  std::vector<std::uint8_t> payload;
};

struct Ack {
  std::uint64_t id = 0;
  std::uint64_t ref_id = 0;
};

struct ErrorReply {
  std::uint64_t id = 0;
  std::uint64_t ref_id = 0;
  std::string reason;
};

using Message = std::variant<Hello, StateUpdate, Configure, PointCloudRequest, PointCloudChunk,
                             Ack, ErrorReply>;

Tag tag_of(const Message& m);
std::uint64_t id_of(const Message& m);

/// A payload that cannot be decoded. `reason()` is what the server echoes
/// back in its Error reply.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  const char* reason() const noexcept { return what(); }
};

/// Complete frame: length prefix, tag and payload.
std::vector<std::uint8_t> encode(const Message& m);
std::vector<std::uint8_t> encode_payload(const Message& m);

/// Decodes one payload. Throws ProtocolError with reasons such as
/// "frame length mismatch", "unknown tag", "malformed configure".
Message decode(std::uint8_t tag, std::span<const std::uint8_t> payload);

/// Splits a serialized file into chunks of at most kChunkBytes
/// (an empty file still produces one empty chunk).
std::vector<PointCloudChunk> make_chunks(std::span<const std::uint8_t> bytes, std::uint64_t ref_id,
                                         std::uint64_t first_id);

/// Order-tolerant reassembly of the chunks answering one request.
class ChunkAssembler {
 public:
  /// Returns false (and ignores the chunk) if it is inconsistent with the
  /// ones already seen: different total, index out of range, duplicate.
  bool add(PointCloudChunk chunk);
  bool complete() const { return total_ && parts_.size() == *total_; }
  std::vector<std::uint8_t> bytes() const;

 private:
  std::optional<std::uint32_t> total_;
  std::optional<std::uint64_t> ref_id_;
  std::map<std::uint32_t, std::vector<std::uint8_t>> parts_;
};

/// Incremental splitter for a received byte stream.
class FrameReader {
 public:
  struct Frame {
    std::uint8_t tag = 0;
    std::vector<std::uint8_t> payload;
  };

  void feed(std::span<const std::uint8_t> bytes);
  /// Next complete frame, if buffered. Throws ProtocolError("frame too
  /// large") when a length prefix exceeds kMaxPayload; the declared payload
  /// is then discarded as it arrives and reading resumes after it.
  std::optional<Frame> next();

 private:
  void discard_pending();

  std::vector<std::uint8_t> buffer_;
  std::size_t offset_ = 0;
  std::uint64_t skip_ = 0;
};

}  // namespace flightcore::bridge
