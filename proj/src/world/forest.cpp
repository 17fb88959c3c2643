#include "flightcore/world/forest.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "flightcore/errors.hpp"

namespace flightcore {

OccupancyCloud generate_forest(const Aabb& bounds, double resolution, double density,
                               std::uint64_t seed, ForestOptions options) {
  if (!(density >= 0.0 && density <= 1.0)) throw ArgumentError("density must be in [0, 1]");
  OccupancyGridBuilder grid(bounds, resolution);  // validates bounds/resolution
  if (density == 0.0) return grid.build();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(bounds.min.x(), bounds.max.x());
  std::uniform_real_distribution<double> uy(bounds.min.y(), bounds.max.y());
  std::uniform_real_distribution<double> ur(options.trunk_radius_min, options.trunk_radius_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Vec3 extent = bounds.extent();
  const double r0 = options.trunk_radius_min, r1 = options.trunk_radius_max;
  const double mean_footprint = std::numbers::pi * (r1 * r1 + r1 * r0 + r0 * r0) / 3.0;
  const auto trunks = static_cast<std::int64_t>(
      std::llround(density * extent.x() * extent.y() / mean_footprint));

  const std::int64_t nz = grid.cells_z();
  for (std::int64_t t = 0; t < trunks; ++t) {
    const double cx = ux(rng);
    const double cy = uy(rng);
    const double radius = ur(rng);

    // Solid disc of cells, extruded over the full height.
    const auto ix0 = static_cast<std::int64_t>(std::floor((cx - radius - bounds.min.x()) / resolution));
    const auto ix1 = static_cast<std::int64_t>(std::floor((cx + radius - bounds.min.x()) / resolution));
    const auto iy0 = static_cast<std::int64_t>(std::floor((cy - radius - bounds.min.y()) / resolution));
    const auto iy1 = static_cast<std::int64_t>(std::floor((cy + radius - bounds.min.y()) / resolution));
    for (auto iy = iy0; iy <= iy1; ++iy) {
      for (auto ix = ix0; ix <= ix1; ++ix) {
        const Vec3 c = grid.cell_center(ix, iy, 0);
        if (std::hypot(c.x() - cx, c.y() - cy) > radius) continue;
        for (std::int64_t iz = 0; iz < nz; ++iz) grid.mark_cell(ix, iy, iz);
      }
    }

    const auto branches =
        static_cast<std::int64_t>(std::floor(options.branch_fraction * extent.z() + unit(rng)));
    for (std::int64_t b = 0; b < branches; ++b) {
      const double z = bounds.min.z() + extent.z() * (0.5 + 0.5 * unit(rng));
      const double heading = 2.0 * std::numbers::pi * unit(rng);
      const Vec3 dir(std::cos(heading), std::sin(heading), 0.0);
      const Vec3 root(cx, cy, z);
      const double len = radius + options.branch_length * unit(rng);
      for (double s = 0.0; s <= len; s += 0.5 * resolution) grid.mark(root + s * dir);
    }
  }
  return grid.build();
}

double ground_coverage(const OccupancyCloud& cloud) {
  const double res = cloud.resolution();
  const Vec3 e = cloud.bounds().extent();
  const double cells = std::ceil(e.x() / res - 1e-9) * std::ceil(e.y() / res - 1e-9);
  std::size_t ground = 0;
  for (const auto& p : cloud.points()) {
    if (static_cast<double>(p.z()) < cloud.bounds().min.z() + res) ++ground;
  }
  return static_cast<double>(ground) / cells;
}

}  // namespace flightcore
