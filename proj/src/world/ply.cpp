#include "flightcore/world/ply.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

#include "flightcore/errors.hpp"

namespace flightcore {

static_assert(std::endian::native == std::endian::little,
              "PLY writer assumes a little-endian host");
static_assert(sizeof(float) == 4);

namespace {

using Kind = PlyParseError::Kind;

std::vector<std::string_view> split_single_spaces(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t start = 0;
  while (true) {
    const auto sp = line.find(' ', start);
    tokens.push_back(line.substr(start, sp == std::string_view::npos ? std::string_view::npos : sp - start));
    if (sp == std::string_view::npos) break;
    start = sp + 1;
  }
  return tokens;
}

bool parse_count(std::string_view s, std::uint64_t& out) {
  if (s.empty() || s.size() > 19) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return std::from_chars(s.data(), s.data() + s.size(), out).ec == std::errc{};
}

}  // namespace

std::string ply_header(std::size_t vertex_count) {
  return "ply\nformat binary_little_endian 1.0\nelement vertex " + std::to_string(vertex_count) +
         "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
}

std::vector<std::uint8_t> serialize_ply(const OccupancyCloud& cloud) {
  const std::string header = ply_header(cloud.size());
  std::vector<std::uint8_t> out(header.size() + 12 * cloud.size());
  std::memcpy(out.data(), header.data(), header.size());
  std::uint8_t* dst = out.data() + header.size();
  for (const auto& p : cloud.points()) {
    const float xyz[3] = {p.x(), p.y(), p.z()};
    std::memcpy(dst, xyz, sizeof xyz);
    dst += sizeof xyz;
  }
  return out;
}

std::size_t export_ply(const OccupancyCloud& cloud, const std::filesystem::path& destination) {
  const auto bytes = serialize_ply(cloud);
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(destination.string(), "cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError(destination.string(), "write failed");
  return bytes.size();
}

OccupancyCloud parse_ply(std::span<const std::uint8_t> bytes,
                         std::optional<double> declared_resolution) {
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string_view {
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      throw PlyParseError(Kind::MalformedHeader, "PLY header not terminated by end_header");
    }
    const auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    return line;
  };
  auto malformed = [&](const std::string& why) {
    return PlyParseError(Kind::MalformedHeader,
                         "PLY header line " + std::to_string(line_no) + ": " + why);
  };

  if (next_line() != "ply") throw malformed("missing 'ply' magic");

  const auto format = split_single_spaces(next_line());
  if (format.size() != 3 || format[0] != "format") throw malformed("expected 'format <type> 1.0'");
  if (format[1] == "ascii" || format[1] == "binary_big_endian") {
    throw PlyParseError(Kind::UnsupportedFormat,
                        "unsupported PLY format '" + std::string(format[1]) +
                            "' (only binary_little_endian is accepted)");
  }
  if (format[1] != "binary_little_endian") throw malformed("unknown format '" + std::string(format[1]) + "'");
  if (format[2] != "1.0") throw malformed("unsupported version '" + std::string(format[2]) + "'");

  std::optional<double> file_resolution;
  std::optional<std::uint64_t> vertex_count;
  int properties = 0;
  constexpr const char* kAxes[3] = {"x", "y", "z"};
  while (true) {
    const auto line = next_line();
    if (line == "end_header") break;
    const auto tok = split_single_spaces(line);
    if (tok[0] == "comment") {
      if (tok.size() == 3 && tok[1] == "resolution") {
        double r = 0.0;
        const auto [ptr, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), r);
        if (ec != std::errc{} || ptr != tok[2].data() + tok[2].size() || !(r > 0.0)) {
          throw malformed("bad resolution comment");
        }
        file_resolution = r;
      }
      continue;
    }
    if (tok[0] == "element") {
      if (vertex_count) throw PlyParseError(Kind::UnsupportedFormat, "only a single vertex element is supported");
      if (tok.size() != 3 || tok[1] != "vertex") {
        throw PlyParseError(Kind::UnsupportedFormat, "only 'element vertex N' is supported");
      }
      std::uint64_t n = 0;
      if (!parse_count(tok[2], n)) throw malformed("bad vertex count");
      vertex_count = n;
      continue;
    }
    if (tok[0] == "property") {
      if (!vertex_count) throw malformed("property before element");
      if (tok.size() != 3) throw malformed("expected 'property <type> <name>'");
      if (tok[1] != "float" && tok[1] != "float32") {
        throw PlyParseError(Kind::UnsupportedFormat, "property type '" + std::string(tok[1]) + "' not supported");
      }
      if (properties >= 3 || tok[2] != kAxes[properties]) {
        throw PlyParseError(Kind::UnsupportedFormat, "expected float properties x, y, z in order");
      }
      ++properties;
      continue;
    }
    throw malformed("unexpected header line");
  }
  if (!vertex_count) throw malformed("missing 'element vertex'");
  if (properties != 3) throw malformed("missing x/y/z properties");

  const std::uint64_t n = *vertex_count;
  const std::uint64_t available = bytes.size() - pos;
  if (n > available / 12) {
    const std::string expected = n <= UINT64_MAX / 12 ? std::to_string(12 * n)
                                                      : std::to_string(n) + " x 12";
    throw PlyParseError(Kind::TruncatedPayload, "truncated PLY payload: expected " + expected +
                                                    " bytes, found " + std::to_string(available));
  }
  if (available != 12 * n) {
    throw PlyParseError(Kind::TrailingData, "PLY payload has " + std::to_string(available - 12 * n) +
                                                " trailing bytes after " + std::to_string(n) + " vertices");
  }

  std::vector<Point3f> points(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    float xyz[3];
    std::memcpy(xyz, bytes.data() + pos + 12 * i, sizeof xyz);
    points[i] = Point3f(xyz[0], xyz[1], xyz[2]);
    if (!points[i].allFinite()) throw PlyParseError(Kind::InvalidVertex, "non-finite vertex " + std::to_string(i));
  }

  const std::optional<double> resolution = file_resolution ? file_resolution : declared_resolution;
  if (!resolution) {
    throw ArgumentError("PLY carries no resolution comment and none was declared");
  }

  Aabb box;
  if (points.empty()) {
    box.max = Vec3::Constant(*resolution);
  } else {
    box.min = box.max = points.front().cast<double>();
    for (const auto& p : points) {
      box.min = box.min.cwiseMin(p.cast<double>());
      box.max = box.max.cwiseMax(p.cast<double>());
    }
    for (int a = 0; a < 3; ++a) {
      if (box.max[a] <= box.min[a]) box.max[a] = box.min[a] + *resolution;
    }
  }
  return OccupancyCloud(std::move(points), box, *resolution);
}

OccupancyCloud import_ply(const std::filesystem::path& source,
                          std::optional<double> declared_resolution) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw IoError(source.string(), "cannot open for reading");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  try {
    return parse_ply(bytes, declared_resolution);
  } catch (const PlyParseError& e) {
    throw PlyParseError(e.kind(), source.string() + ": " + e.what());
  }
}

}  // namespace flightcore
