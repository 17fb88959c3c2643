#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flightcore/dynamics/quad_state.hpp"

namespace flightcore {

using Point3f = Eigen::Vector3f;

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Vec3 extent() const { return max - min; }
  bool degenerate() const {
    return !min.allFinite() || !max.allFinite() || (max.array() <= min.array()).any();
  }
};

/// Integer cell coordinates of a uniform grid anchored at a bounds corner.
struct CellIndex {
  std::int64_t x = 0, y = 0, z = 0;
  bool operator==(const CellIndex&) const = default;
};

/// Immutable set of occupied points with a uniform hash-grid index at cell
/// size = resolution, plus a coarse block layer for fast rejection of empty
/// neighbourhoods.
class OccupancyCloud {
 public:
  /// Empty cloud.
  OccupancyCloud(const Aabb& bounds, double resolution);

  /// Validates that every point lies inside `bounds` and that no two points
  /// are closer than resolution/2. Throws ArgumentError otherwise.
  OccupancyCloud(std::vector<Point3f> points, const Aabb& bounds, double resolution);

  const std::vector<Point3f>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Aabb& bounds() const { return bounds_; }
  double resolution() const { return resolution_; }

  /// True iff some occupied point lies within `radius` (inclusive) of `p`.
  bool collides(const Vec3& p, double radius) const;

  /// Samples the segment every `spacing` metres (both endpoints included).
  bool segment_collides(const Vec3& a, const Vec3& b, double radius, double spacing) const;

  /// Points inside `box`, optionally re-gridded to a coarser resolution.
  OccupancyCloud crop(const Aabb& box, double resolution) const;

 private:
  friend class OccupancyGridBuilder;
  struct Trusted {};
  // Grid-built clouds satisfy the invariants by construction.
  OccupancyCloud(Trusted, std::vector<Point3f> points, const Aabb& bounds, double resolution);

  static constexpr int kBlockCells = 8;

  /// Open-addressing map from packed cell key to a dense slot number.
  class FlatKeyIndex {
   public:
    void build(std::span<const std::uint64_t> unique_keys);
    /// Slot of `key` or -1.
    std::int64_t find(std::uint64_t key) const;

   private:
    std::vector<std::uint64_t> keys_;
    std::vector<std::uint32_t> slots_;
    std::uint64_t mask_ = 0;
  };

  CellIndex cell_of(const Vec3& p) const;
  void build_index();
  void check_spacing() const;
  std::uint64_t points_key(std::uint32_t i) const;

  std::vector<Point3f> points_;
  Aabb bounds_;
  double resolution_ = 0.0;
  CellIndex max_cell_;
  // Points sorted by cell; cell_begin_[i] .. cell_begin_[i+1] index into order_.
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> cell_begin_;
  FlatKeyIndex cells_;
  FlatKeyIndex blocks_;
};

/// Packs non-negative cell coordinates (< 2^21 each) into one key.
std::uint64_t pack_cell(const CellIndex& c);
CellIndex unpack_cell(std::uint64_t key);

/// Accumulates occupied grid cells; emits cell-centre points in a
/// deterministic (sorted) order.
class OccupancyGridBuilder {
 public:
  OccupancyGridBuilder(const Aabb& bounds, double resolution);

  /// Number of addressable cells in the bounds.
  std::uint64_t cell_count() const;
  std::int64_t cells_x() const { return nx_; }
  std::int64_t cells_y() const { return ny_; }
  std::int64_t cells_z() const { return nz_; }

  /// Marks the cell containing p; points outside the bounds are ignored.
  void mark(const Vec3& p);
  /// Out-of-range cells are ignored.
  void mark_cell(std::int64_t ix, std::int64_t iy, std::int64_t iz);
  Vec3 cell_center(std::int64_t ix, std::int64_t iy, std::int64_t iz) const;

  /// Deduplicates and emits cell centres sorted by (z, y, x).
  OccupancyCloud build() const;

 private:
  Aabb bounds_;
  double resolution_;
  std::int64_t nx_, ny_, nz_;
  std::vector<std::uint64_t> marked_;
};

}  // namespace flightcore
