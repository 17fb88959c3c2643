#include "flightcore/world/occupancy_cloud.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "flightcore/errors.hpp"

namespace flightcore {

namespace {

constexpr std::int64_t kAxisLimit = std::int64_t{1} << 21;

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

std::int64_t axis_cells(double extent, double resolution) {
  const double n = std::ceil(extent / resolution - 1e-9);
  if (!(n < static_cast<double>(kAxisLimit))) {
    throw ArgumentError("occupancy grid too large: more than 2^21 cells along an axis");
  }
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
}

void check_grid(const Aabb& bounds, double resolution) {
  if (bounds.degenerate()) throw ArgumentError("degenerate bounds");
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw ArgumentError("resolution must be > 0");
  }
}

// Explicit ordering so that the index and independent scans agree bit for bit.
inline double dist2(const Vec3& p, const Point3f& q) {
  const double dx = p.x() - static_cast<double>(q.x());
  const double dy = p.y() - static_cast<double>(q.y());
  const double dz = p.z() - static_cast<double>(q.z());
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

CellIndex unpack_cell(std::uint64_t key) {
  constexpr std::uint64_t mask = (std::uint64_t{1} << 21) - 1;
  return {static_cast<std::int64_t>(key & mask), static_cast<std::int64_t>((key >> 21) & mask),
          static_cast<std::int64_t>(key >> 42)};
}

std::uint64_t pack_cell(const CellIndex& c) {
  return static_cast<std::uint64_t>(c.x) | (static_cast<std::uint64_t>(c.y) << 21) |
         (static_cast<std::uint64_t>(c.z) << 42);
}

void OccupancyCloud::FlatKeyIndex::build(std::span<const std::uint64_t> unique_keys) {
  keys_.assign(unique_keys.begin(), unique_keys.end());
  const std::uint64_t capacity = std::bit_ceil(std::max<std::uint64_t>(16, 2 * keys_.size()));
  mask_ = capacity - 1;
  slots_.assign(capacity, std::numeric_limits<std::uint32_t>::max());
  for (std::uint32_t i = 0; i < keys_.size(); ++i) {
    std::uint64_t h = mix64(keys_[i]) & mask_;
    while (slots_[h] != std::numeric_limits<std::uint32_t>::max()) h = (h + 1) & mask_;
    slots_[h] = i;
  }
}

std::int64_t OccupancyCloud::FlatKeyIndex::find(std::uint64_t key) const {
  if (keys_.empty()) return -1;
  std::uint64_t h = mix64(key) & mask_;
  while (true) {
    const std::uint32_t s = slots_[h];
    if (s == std::numeric_limits<std::uint32_t>::max()) return -1;
    if (keys_[s] == key) return s;
    h = (h + 1) & mask_;
  }
}

OccupancyCloud::OccupancyCloud(const Aabb& bounds, double resolution)
    : bounds_(bounds), resolution_(resolution) {
  check_grid(bounds, resolution);
  axis_cells(bounds.extent().maxCoeff(), resolution);
  build_index();
}

OccupancyCloud::OccupancyCloud(std::vector<Point3f> points, const Aabb& bounds, double resolution)
    : points_(std::move(points)), bounds_(bounds), resolution_(resolution) {
  check_grid(bounds, resolution);
  axis_cells(bounds.extent().maxCoeff(), resolution);
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw ArgumentError("too many points for one cloud");
  }
  for (const auto& q : points_) {
    if (!q.allFinite() || !bounds_.contains(q.cast<double>())) {
      throw ArgumentError("point outside cloud bounds");
    }
  }
  build_index();

  check_spacing();
}

OccupancyCloud::OccupancyCloud(Trusted, std::vector<Point3f> points, const Aabb& bounds,
                               double resolution)
    : points_(std::move(points)), bounds_(bounds), resolution_(resolution) {
  build_index();
}

CellIndex OccupancyCloud::cell_of(const Vec3& p) const {
  auto axis = [this](double v, double lo) {
    const double c = std::floor((v - lo) / resolution_);
    return static_cast<std::int64_t>(std::clamp(c, -1.0, static_cast<double>(kAxisLimit)));
  };
  return {axis(p.x(), bounds_.min.x()), axis(p.y(), bounds_.min.y()), axis(p.z(), bounds_.min.z())};
}

void OccupancyCloud::check_spacing() const {
  // Two points closer than resolution/2 share a cell or sit in adjacent
  // cells on each other's nearer side. Each cross-cell pair is examined
  // once, from the point whose cell has the larger key.
  const double min_d2 = 0.25 * resolution_ * resolution_;
  for (std::size_t slot = 0; slot + 1 < cell_begin_.size(); ++slot) {
    const std::uint64_t key = points_key(order_[cell_begin_[slot]]);
    const CellIndex c = unpack_cell(key);
    for (auto i = cell_begin_[slot]; i < cell_begin_[slot + 1]; ++i) {
      const Vec3 p = points_[order_[i]].cast<double>();
      for (auto j = i + 1; j < cell_begin_[slot + 1]; ++j) {
        if (dist2(p, points_[order_[j]]) < min_d2) throw ArgumentError("points closer than resolution/2");
      }
      const Vec3 frac = (p - bounds_.min) / resolution_;
      const std::int64_t step[3] = {
          frac.x() - static_cast<double>(c.x) < 0.5 ? -1 : 1,
          frac.y() - static_cast<double>(c.y) < 0.5 ? -1 : 1,
          frac.z() - static_cast<double>(c.z) < 0.5 ? -1 : 1,
      };
      for (int corner = 1; corner < 8; ++corner) {
        const CellIndex n{c.x + ((corner & 1) ? step[0] : 0), c.y + ((corner & 2) ? step[1] : 0),
                          c.z + ((corner & 4) ? step[2] : 0)};
        if (n.x < 0 || n.y < 0 || n.z < 0 || n.x > max_cell_.x || n.y > max_cell_.y ||
            n.z > max_cell_.z) {
          continue;
        }
        const std::uint64_t nkey = pack_cell(n);
        if (nkey > key) continue;
        const auto other = cells_.find(nkey);
        if (other < 0) continue;
        for (auto k = cell_begin_[other]; k < cell_begin_[other + 1]; ++k) {
          if (dist2(p, points_[order_[k]]) < min_d2) {
            throw ArgumentError("points closer than resolution/2");
          }
        }
      }
    }
  }
}

std::uint64_t OccupancyCloud::points_key(std::uint32_t i) const {
  return pack_cell(cell_of(points_[i].cast<double>()));
}

void OccupancyCloud::build_index() {
  max_cell_ = cell_of(bounds_.max);
  std::vector<std::uint64_t> keys(points_.size());
  for (std::uint32_t i = 0; i < points_.size(); ++i) keys[i] = points_key(i);

  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!std::is_sorted(keys.begin(), keys.end())) {
    std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(points_.size());
    for (std::uint32_t i = 0; i < keyed.size(); ++i) keyed[i] = {keys[i], i};
    std::sort(keyed.begin(), keyed.end());
    for (std::uint32_t i = 0; i < keyed.size(); ++i) order_[i] = keyed[i].second;
  }

  std::vector<std::uint64_t> unique_keys;
  std::vector<std::uint64_t> block_keys;
  cell_begin_.clear();
  for (std::uint32_t i = 0; i < order_.size(); ++i) {
    const std::uint64_t k = keys[order_[i]];
    if (unique_keys.empty() || unique_keys.back() != k) {
      unique_keys.push_back(k);
      cell_begin_.push_back(i);
      const CellIndex c = unpack_cell(k);
      block_keys.push_back(pack_cell({c.x / kBlockCells, c.y / kBlockCells, c.z / kBlockCells}));
    }
  }
  cell_begin_.push_back(static_cast<std::uint32_t>(order_.size()));
  std::sort(block_keys.begin(), block_keys.end());
  block_keys.erase(std::unique(block_keys.begin(), block_keys.end()), block_keys.end());

  cells_.build(unique_keys);
  blocks_.build(block_keys);
}

bool OccupancyCloud::collides(const Vec3& p, double radius) const {
  if (points_.empty()) return false;
  if (!(radius >= 0.0)) throw ArgumentError("collision radius must be >= 0");
  CellIndex lo = cell_of(p - Vec3::Constant(radius));
  CellIndex hi = cell_of(p + Vec3::Constant(radius));
  lo = {std::max<std::int64_t>(lo.x, 0), std::max<std::int64_t>(lo.y, 0), std::max<std::int64_t>(lo.z, 0)};
  hi = {std::min(hi.x, max_cell_.x), std::min(hi.y, max_cell_.y), std::min(hi.z, max_cell_.z)};
  if (lo.x > hi.x || lo.y > hi.y || lo.z > hi.z) return false;

  bool near_block = false;
  for (auto bz = lo.z / kBlockCells; bz <= hi.z / kBlockCells && !near_block; ++bz)
    for (auto by = lo.y / kBlockCells; by <= hi.y / kBlockCells && !near_block; ++by)
      for (auto bx = lo.x / kBlockCells; bx <= hi.x / kBlockCells && !near_block; ++bx)
        near_block = blocks_.find(pack_cell({bx, by, bz})) >= 0;
  if (!near_block) return false;

  const double r2 = radius * radius;
  for (auto z = lo.z; z <= hi.z; ++z)
    for (auto y = lo.y; y <= hi.y; ++y)
      for (auto x = lo.x; x <= hi.x; ++x) {
        const auto slot = cells_.find(pack_cell({x, y, z}));
        if (slot < 0) continue;
        for (auto i = cell_begin_[slot]; i < cell_begin_[slot + 1]; ++i) {
          if (dist2(p, points_[order_[i]]) <= r2) return true;
        }
      }
  return false;
}

namespace {

/// Parameter interval of {t in [0, 1] : |lo + t * d| <= r} for a scalar
/// offset `lo`; empty when first > second.
std::pair<double, double> slab_interval(double lo, double d, double r) {
  if (d == 0.0) return std::abs(lo) <= r ? std::pair{0.0, 1.0} : std::pair{1.0, 0.0};
  double t0 = (-r - lo) / d, t1 = (r - lo) / d;
  if (t0 > t1) std::swap(t0, t1);
  return {std::max(t0, 0.0), std::min(t1, 1.0)};
}

}  // namespace

bool OccupancyCloud::segment_collides(const Vec3& a, const Vec3& b, double radius,
                                      double spacing) const {
  if (!(spacing > 0.0)) throw ArgumentError("segment spacing must be > 0");
  if (!(radius >= 0.0)) throw ArgumentError("collision radius must be >= 0");
  if (points_.empty()) return false;
  const Vec3 d = b - a;
  const double len = d.norm();
  const auto n = static_cast<std::int64_t>(std::ceil(len / spacing));
  if (n == 0) return collides(a, radius);

  // Equivalent to collides() at every sample a + (i/n)(b - a), i = 0..n, but
  // each occupied cell near the segment is visited once: candidate points
  // come from the cells of a conservative capsule, then only the samples
  // that can reach a candidate are tested.
  const double r2 = radius * radius;
  const double half = 0.5 * resolution_;
  const double slack = radius + half + 1e-9 * (1.0 + len);
  const double window = radius / len * static_cast<double>(n) + 1.0;
  auto sample_hits = [&](const Point3f& q) {
    const double t = std::clamp((q.cast<double>() - a).dot(d) / (len * len), 0.0, 1.0);
    const auto lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(t * n - window)));
    const auto hi = std::min<std::int64_t>(n, static_cast<std::int64_t>(std::ceil(t * n + window)));
    for (auto i = lo; i <= hi; ++i) {
      const double s = static_cast<double>(i) / static_cast<double>(n);
      if (dist2(a + s * (b - a), q) <= r2) return true;
    }
    return false;
  };
  auto cell_range = [&](double lo, double hi, double origin, std::int64_t max_cell) {
    const auto c0 = static_cast<std::int64_t>(std::floor((lo - origin) / resolution_));
    const auto c1 = static_cast<std::int64_t>(std::floor((hi - origin) / resolution_));
    return std::pair{std::max<std::int64_t>(c0, 0), std::min(c1, max_cell)};
  };

  const auto [x0, x1] = cell_range(std::min(a.x(), b.x()) - radius, std::max(a.x(), b.x()) + radius,
                                   bounds_.min.x(), max_cell_.x);
  for (auto x = x0; x <= x1; ++x) {
    const double cx = bounds_.min.x() + (static_cast<double>(x) + 0.5) * resolution_;
    const auto [tx0, tx1] = slab_interval(a.x() - cx, d.x(), slack);
    if (tx0 > tx1) continue;
    const double ya = a.y() + tx0 * d.y(), yb = a.y() + tx1 * d.y();
    const auto [y0, y1] = cell_range(std::min(ya, yb) - radius, std::max(ya, yb) + radius,
                                     bounds_.min.y(), max_cell_.y);
    for (auto y = y0; y <= y1; ++y) {
      const double cy = bounds_.min.y() + (static_cast<double>(y) + 0.5) * resolution_;
      const auto [ty0, ty1] = slab_interval(a.y() - cy, d.y(), slack);
      const double t0 = std::max(tx0, ty0), t1 = std::min(tx1, ty1);
      if (t0 > t1) continue;
      const double za = a.z() + t0 * d.z(), zb = a.z() + t1 * d.z();
      const auto [z0, z1] = cell_range(std::min(za, zb) - radius, std::max(za, zb) + radius,
                                       bounds_.min.z(), max_cell_.z);
      for (auto z = z0; z <= z1; ++z) {
        const auto slot = cells_.find(pack_cell({x, y, z}));
        if (slot < 0) continue;
        for (auto i = cell_begin_[slot]; i < cell_begin_[slot + 1]; ++i) {
          if (sample_hits(points_[order_[i]])) return true;
        }
      }
    }
  }
  return false;
}

OccupancyCloud OccupancyCloud::crop(const Aabb& box, double resolution) const {
  check_grid(box, resolution);
  if (resolution > resolution_) {
    OccupancyGridBuilder builder(box, resolution);
    for (const auto& q : points_) builder.mark(q.cast<double>());
    return builder.build();
  }
  std::vector<Point3f> kept;
  for (const auto& q : points_) {
    if (box.contains(q.cast<double>())) kept.push_back(q);
  }
  return OccupancyCloud(Trusted{}, std::move(kept), box, resolution_);
}

OccupancyGridBuilder::OccupancyGridBuilder(const Aabb& bounds, double resolution)
    : bounds_(bounds), resolution_(resolution) {
  check_grid(bounds, resolution);
  const Vec3 e = bounds.extent();
  nx_ = axis_cells(e.x(), resolution);
  ny_ = axis_cells(e.y(), resolution);
  nz_ = axis_cells(e.z(), resolution);
}

std::uint64_t OccupancyGridBuilder::cell_count() const {
  return static_cast<std::uint64_t>(nx_) * static_cast<std::uint64_t>(ny_) *
         static_cast<std::uint64_t>(nz_);
}

void OccupancyGridBuilder::mark(const Vec3& p) {
  if (!p.allFinite() || !bounds_.contains(p)) return;
  const Vec3 c = ((p - bounds_.min) / resolution_).array().floor();
  mark_cell(std::min<std::int64_t>(static_cast<std::int64_t>(c.x()), nx_ - 1),
            std::min<std::int64_t>(static_cast<std::int64_t>(c.y()), ny_ - 1),
            std::min<std::int64_t>(static_cast<std::int64_t>(c.z()), nz_ - 1));
}

void OccupancyGridBuilder::mark_cell(std::int64_t ix, std::int64_t iy, std::int64_t iz) {
  if (ix < 0 || iy < 0 || iz < 0 || ix >= nx_ || iy >= ny_ || iz >= nz_) return;
  marked_.push_back(pack_cell({ix, iy, iz}));
}

Vec3 OccupancyGridBuilder::cell_center(std::int64_t ix, std::int64_t iy, std::int64_t iz) const {
  return bounds_.min + resolution_ * Vec3(static_cast<double>(ix) + 0.5,
                                          static_cast<double>(iy) + 0.5,
                                          static_cast<double>(iz) + 0.5);
}

OccupancyCloud OccupancyGridBuilder::build() const {
  std::vector<std::uint64_t> keys = marked_;
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  constexpr std::uint64_t mask = (std::uint64_t{1} << 21) - 1;
  std::vector<Point3f> points;
  points.reserve(keys.size());
  for (const std::uint64_t k : keys) {
    const Vec3 c = cell_center(static_cast<std::int64_t>(k & mask),
                               static_cast<std::int64_t>((k >> 21) & mask),
                               static_cast<std::int64_t>(k >> 42));
    // The last cell of an axis may overhang the bounds when the extent is
    // not a whole number of cells; keep the stored float inside.
    Point3f q = c.cwiseMin(bounds_.max).cast<float>();
    for (int a = 0; a < 3; ++a) {
      while (static_cast<double>(q[a]) > bounds_.max[a]) {
        q[a] = std::nextafter(q[a], -std::numeric_limits<float>::infinity());
      }
    }
    points.push_back(q);
  }
  return OccupancyCloud(OccupancyCloud::Trusted{}, std::move(points), bounds_, resolution_);
}

}  // namespace flightcore
