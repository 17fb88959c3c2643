#pragma once

#include <cstdint>

#include "flightcore/world/occupancy_cloud.hpp"

namespace flightcore {

/// Shape knobs for the synthetic forest.
struct ForestOptions {
  double trunk_radius_min = 0.2;   // [m]
  double trunk_radius_max = 0.5;   // [m]
  double branch_fraction = 0.3;    // branches per trunk, relative to trunk height in metres
  double branch_length = 1.0;      // [m]
};

/// Seeded forest of vertical solid cylinders ("trunks") spanning the full
/// height of the bounds, with short horizontal branch segments in the upper
/// half. `density` is the target fraction of the ground covered by trunk
/// footprints; overlaps make the realized coverage slightly lower.
/// Reproducible bit for bit for a fixed seed.
OccupancyCloud generate_forest(const Aabb& bounds, double resolution, double density,
                               std::uint64_t seed, ForestOptions options = {});

/// Fraction of ground-layer cells that are occupied.
double ground_coverage(const OccupancyCloud& cloud);

}  // namespace flightcore
