#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "flightcore/world/occupancy_cloud.hpp"

namespace flightcore {

/// Binary little-endian, vertex-only PLY with float32 x/y/z:
///
///   ply
///   format binary_little_endian 1.0
///   element vertex N
///   property float x
///   property float y
///   property float z
///   end_header
///   <N * 12 bytes>
///
/// The reader additionally accepts `comment` lines after the format line; a
/// `comment resolution <metres>` line supplies the cloud resolution.
class PlyParseError : public std::runtime_error {
 public:
  enum class Kind { MalformedHeader, UnsupportedFormat, TruncatedPayload, TrailingData, InvalidVertex };
  PlyParseError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

std::string ply_header(std::size_t vertex_count);

/// Serializes to an in-memory buffer (byte-identical to export_ply output).
std::vector<std::uint8_t> serialize_ply(const OccupancyCloud& cloud);

/// Writes the file; returns the byte count (header length + 12 N).
/// Throws IoError carrying the path.
std::size_t export_ply(const OccupancyCloud& cloud, const std::filesystem::path& destination);

/// Parses a buffer. Bounds are the tight AABB of the points (a zero-width
/// axis is widened by one resolution so that the box is non-degenerate).
/// The resolution comes from the file comment if present, otherwise from
/// `declared_resolution`; if neither is available, throws ArgumentError.
OccupancyCloud parse_ply(std::span<const std::uint8_t> bytes,
                         std::optional<double> declared_resolution = std::nullopt);

OccupancyCloud import_ply(const std::filesystem::path& source,
                          std::optional<double> declared_resolution = std::nullopt);

}  // namespace flightcore
