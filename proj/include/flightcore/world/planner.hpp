#pragma once

#include <cstdint>
#include <vector>

#include "flightcore/world/occupancy_cloud.hpp"

namespace flightcore {

struct PathQuery {
  Vec3 start = Vec3::Zero();
  Vec3 goal = Vec3::Zero();
  double robot_radius = 0.25;  // [m]
  double time_budget = 1.0;   // wall clock [s]
};

struct PlannerOptions {
  double step_size = 1.5;        // max tree edge length [m]
  double goal_bias = 0.1;        // probability of sampling the other tree's root
  std::size_t max_iterations = 200000;
  bool shortcut = true;
};

struct PlanResult {
  bool found = false;
  std::vector<Vec3> path;  // start ... goal when found
  std::size_t iterations = 0;
  double elapsed_seconds = 0.0;
};

/// Segment check spacing used by the planner: half the cloud resolution.
double planner_check_spacing(const OccupancyCloud& cloud);

/// Bidirectional RRT (RRT-Connect) with greedy straight-line shortcutting.
/// Every vertex and every segment sampled at resolution/2 is collision free
/// at the robot radius. The search is fully determined by `seed`; only the
/// wall-clock budget can cut it short, in which case `found` is false.
/// Throws ArgumentError when start/goal are outside the bounds or collide.
PlanResult plan_path(const OccupancyCloud& cloud, const PathQuery& query, std::uint64_t seed,
                     const PlannerOptions& options = {});

double path_length(const std::vector<Vec3>& path);

/// Greedy shortcutting: from each kept vertex jump to the farthest later
/// vertex reachable by a collision-free straight segment.
std::vector<Vec3> shortcut_path(const OccupancyCloud& cloud, const std::vector<Vec3>& path,
                                double robot_radius);

}  // namespace flightcore
