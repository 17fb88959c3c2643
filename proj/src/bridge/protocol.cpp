#include "flightcore/bridge/protocol.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <sstream>

namespace flightcore::bridge {

static_assert(std::endian::native == std::endian::little, "wire codec assumes a little-endian host");

namespace {

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto at = out_.size();
    out_.resize(at + sizeof(T));
    std::memcpy(out_.data() + at, &value, sizeof(T));
  }
  void put_bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void put_text(const std::string& s) { out_.insert(out_.end(), s.begin(), s.end()); }
  void put_vec3(const Vec3& v) {
    put(v.x());
    put(v.y());
    put(v.z());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  template <typename T>
  T get() {
    if (remaining() < sizeof(T)) throw ProtocolError("frame length mismatch");
    T value;
    std::memcpy(&value, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  Vec3 get_vec3() {
    const double x = get<double>();
    const double y = get<double>();
    const double z = get<double>();
    return {x, y, z};
  }
  std::span<const std::uint8_t> rest() {
    auto r = in_.subspan(pos_);
    pos_ = in_.size();
    return r;
  }
  std::size_t remaining() const { return in_.size() - pos_; }
  void expect_end() const {
    if (remaining() != 0) throw ProtocolError("frame length mismatch");
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Configure decode_configure(std::uint64_t id, std::span<const std::uint8_t> text_bytes) {
  Configure c;
  c.id = id;
  bool have_envs = false;
  std::string_view text(reinterpret_cast<const char*>(text_bytes.data()), text_bytes.size());
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ProtocolError("malformed configure: expected key=value");
    const std::string_view key = line.substr(0, eq);
    const std::string_view value = line.substr(eq + 1);
    const char* first = value.data();
    const char* last = value.data() + value.size();
    if (key == "n_envs") {
      unsigned long long n = 0;
      auto [p, ec] = std::from_chars(first, last, n);
      if (ec != std::errc{} || p != last || n == 0 || n > (1u << 20)) {
        throw ProtocolError("malformed configure: bad n_envs");
      }
      c.n_envs = static_cast<std::size_t>(n);
      have_envs = true;
    } else if (key == "dt") {
      double dt = 0.0;
      auto [p, ec] = std::from_chars(first, last, dt);
      if (ec != std::errc{} || p != last || !(dt > 0.0) || dt > 1.0) {
        throw ProtocolError("malformed configure: bad dt");
      }
      c.dt = dt;
    } else if (key == "params_digest") {
      std::uint64_t d = 0;
      auto [p, ec] = std::from_chars(first, last, d, 16);
      if (ec != std::errc{} || p != last || value.size() != 16) {
        throw ProtocolError("malformed configure: bad params_digest");
      }
      c.params_digest = d;
    } else {
      throw ProtocolError("malformed configure: unknown key '" + std::string(key) + "'");
    }
  }
  if (!have_envs) throw ProtocolError("malformed configure: missing n_envs");
  return c;
}

}  // namespace

Tag tag_of(const Message& m) { return static_cast<Tag>(m.index()); }

std::uint64_t id_of(const Message& m) {
  return std::visit([](const auto& x) { return x.id; }, m);
}

std::vector<std::uint8_t> encode_payload(const Message& m) {
  Writer w;
  w.put(id_of(m));
  std::visit(
      [&w](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Hello>) {
          w.put(x.version);
        } else if constexpr (std::is_same_v<T, StateUpdate>) {
          w.put(x.sim_time);
          w.put(static_cast<std::uint32_t>(x.poses.size()));
          for (const auto& e : x.poses) {
            w.put(e.env_id);
            w.put_vec3(e.p);
            w.put(e.q.w());
            w.put(e.q.x());
            w.put(e.q.y());
            w.put(e.q.z());
          }
        } else if constexpr (std::is_same_v<T, Configure>) {
          std::ostringstream s;
          s.precision(17);
          s << "n_envs=" << x.n_envs << "\n";
          if (x.dt) s << "dt=" << *x.dt << "\n";
          if (x.params_digest) s << "params_digest=" << hex64(*x.params_digest) << "\n";
          w.put_text(s.str());
        } else if constexpr (std::is_same_v<T, PointCloudRequest>) {
          w.put_vec3(x.bounds.min);
          w.put_vec3(x.bounds.max);
          w.put(x.resolution);
        } else if constexpr (std::is_same_v<T, PointCloudChunk>) {
          w.put(x.ref_id);
          w.put(x.index);
          w.put(x.total);
          w.put_bytes(x.payload);
        } else if constexpr (std::is_same_v<T, Ack>) {
          w.put(x.ref_id);
        } else if constexpr (std::is_same_v<T, ErrorReply>) {
          w.put(x.ref_id);
          w.put_text(x.reason);
        }
      },
      m);
  return w.take();
}

std::vector<std::uint8_t> encode(const Message& m) {
  const auto payload = encode_payload(m);
  if (payload.size() > kMaxPayload) throw ProtocolError("frame too large");
  Writer w;
  w.put(static_cast<std::uint32_t>(payload.size()));
  w.put(static_cast<std::uint8_t>(tag_of(m)));
  w.put_bytes(payload);
  return w.take();
}

Message decode(std::uint8_t tag, std::span<const std::uint8_t> payload) {
  if (tag > static_cast<std::uint8_t>(Tag::Error)) throw ProtocolError("unknown tag");
  Reader r(payload);
  const auto id = r.get<std::uint64_t>();
  switch (static_cast<Tag>(tag)) {
    case Tag::Hello: {
      Hello h{id, r.get<std::uint16_t>()};
      r.expect_end();
      return h;
    }
    case Tag::StateUpdate: {
      StateUpdate u;
      u.id = id;
      u.sim_time = r.get<double>();
      const auto count = r.get<std::uint32_t>();
      if (r.remaining() != static_cast<std::size_t>(count) * 60u) throw ProtocolError("frame length mismatch");
      u.poses.resize(count);
      for (auto& e : u.poses) {
        e.env_id = r.get<std::uint32_t>();
        e.p = r.get_vec3();
        const double w = r.get<double>();
        const double x = r.get<double>();
        const double y = r.get<double>();
        const double z = r.get<double>();
        e.q = Quat(w, x, y, z);
      }
      return u;
    }
    case Tag::Configure:
      return decode_configure(id, r.rest());
    case Tag::PointCloudRequest: {
      PointCloudRequest q;
      q.id = id;
      q.bounds.min = r.get_vec3();
      q.bounds.max = r.get_vec3();
      q.resolution = r.get<double>();
      r.expect_end();
      return q;
    }
    case Tag::PointCloudChunk: {
      PointCloudChunk c;
      c.id = id;
      c.ref_id = r.get<std::uint64_t>();
      c.index = r.get<std::uint32_t>();
      c.total = r.get<std::uint32_t>();
      if (c.index >= c.total) throw ProtocolError("chunk index out of range");
      const auto rest = r.rest();
      c.payload.assign(rest.begin(), rest.end());
      return c;
    }
    case Tag::Ack: {
      Ack a{id, r.get<std::uint64_t>()};
      r.expect_end();
      return a;
    }
    case Tag::Error: {
      ErrorReply e;
      e.id = id;
      e.ref_id = r.get<std::uint64_t>();
      const auto rest = r.rest();
      e.reason.assign(rest.begin(), rest.end());
      return e;
    }
  }
  throw ProtocolError("unknown tag");
}

std::vector<PointCloudChunk> make_chunks(std::span<const std::uint8_t> bytes, std::uint64_t ref_id,
                                         std::uint64_t first_id) {
  const std::size_t total = std::max<std::size_t>(1, (bytes.size() + kChunkBytes - 1) / kChunkBytes);
  std::vector<PointCloudChunk> chunks(total);
  for (std::size_t i = 0; i < total; ++i) {
    auto& c = chunks[i];
    c.id = first_id + i;
    c.ref_id = ref_id;
    c.index = static_cast<std::uint32_t>(i);
    c.total = static_cast<std::uint32_t>(total);
    const std::size_t begin = i * kChunkBytes;
    const std::size_t end = std::min(bytes.size(), begin + kChunkBytes);
    c.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(begin),
                     bytes.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return chunks;
}

bool ChunkAssembler::add(PointCloudChunk chunk) {
  if (chunk.total == 0 || chunk.index >= chunk.total) return false;
  if (total_ && (*total_ != chunk.total || *ref_id_ != chunk.ref_id)) return false;
  if (parts_.count(chunk.index)) return false;
  total_ = chunk.total;
  ref_id_ = chunk.ref_id;
  parts_.emplace(chunk.index, std::move(chunk.payload));
  return true;
}

std::vector<std::uint8_t> ChunkAssembler::bytes() const {
  std::vector<std::uint8_t> out;
  for (const auto& [index, part] : parts_) out.insert(out.end(), part.begin(), part.end());
  return out;
}

void FrameReader::feed(std::span<const std::uint8_t> bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

void FrameReader::discard_pending() {
  const std::size_t n = static_cast<std::size_t>(
      std::min<std::uint64_t>(skip_, buffer_.size() - offset_));
  offset_ += n;
  skip_ -= n;
}

std::optional<FrameReader::Frame> FrameReader::next() {
  discard_pending();
  if (skip_ > 0) return std::nullopt;
  const std::size_t avail = buffer_.size() - offset_;
  if (avail < 5) return std::nullopt;
  std::uint32_t len = 0;
  std::memcpy(&len, buffer_.data() + offset_, sizeof len);
  if (len > kMaxPayload) {
    offset_ += 5;
    skip_ = len;
    discard_pending();
    throw ProtocolError("frame too large");
  }
  if (avail < 5u + len) return std::nullopt;
  Frame f;
  f.tag = buffer_[offset_ + 4];
  f.payload.assign(buffer_.begin() + static_cast<std::ptrdiff_t>(offset_ + 5),
                   buffer_.begin() + static_cast<std::ptrdiff_t>(offset_ + 5 + len));
  offset_ += 5u + len;
  if (offset_ > (1u << 20) && offset_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
    offset_ = 0;
  }
  return f;
}

}  // namespace flightcore::bridge
