#include "flightcore/world/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "flightcore/errors.hpp"

namespace flightcore {

namespace {

struct Tree {
  std::vector<Vec3> nodes;
  std::vector<std::int64_t> parent;

  std::size_t nearest(const Vec3& p) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double d = (nodes[i] - p).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

  std::size_t add(const Vec3& p, std::int64_t from) {
    nodes.push_back(p);
    parent.push_back(from);
    return nodes.size() - 1;
  }

  std::vector<Vec3> branch_to_root(std::size_t i) const {
    std::vector<Vec3> out;
    for (auto k = static_cast<std::int64_t>(i); k >= 0; k = parent[k]) out.push_back(nodes[k]);
    return out;
  }
};

enum class Extend { Trapped, Advanced, Reached };

}  // namespace

double planner_check_spacing(const OccupancyCloud& cloud) { return 0.5 * cloud.resolution(); }

double path_length(const std::vector<Vec3>& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += (path[i] - path[i - 1]).norm();
  return len;
}

std::vector<Vec3> shortcut_path(const OccupancyCloud& cloud, const std::vector<Vec3>& path,
                                double robot_radius) {
  if (path.size() <= 2) return path;
  const double spacing = planner_check_spacing(cloud);
  std::vector<Vec3> out{path.front()};
  std::size_t i = 0;
  while (i + 1 < path.size()) {
    std::size_t j = path.size() - 1;
    while (j > i + 1 && cloud.segment_collides(path[i], path[j], robot_radius, spacing)) --j;
    out.push_back(path[j]);
    i = j;
  }
  return out;
}

PlanResult plan_path(const OccupancyCloud& cloud, const PathQuery& query, std::uint64_t seed,
                     const PlannerOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  if (!(query.robot_radius >= 0.0) || !(query.time_budget > 0.0)) {
    throw ArgumentError("path query needs robot_radius >= 0 and time_budget > 0");
  }
  if (!(options.step_size > 0.0) || !(options.goal_bias >= 0.0 && options.goal_bias <= 1.0)) {
    throw ArgumentError("planner needs step_size > 0 and goal_bias in [0, 1]");
  }
  const Aabb& box = cloud.bounds();
  if (!box.contains(query.start) || !box.contains(query.goal)) {
    throw ArgumentError("path query start/goal outside the cloud bounds");
  }
  if (cloud.collides(query.start, query.robot_radius)) throw ArgumentError("path start is in collision");
  if (cloud.collides(query.goal, query.robot_radius)) throw ArgumentError("path goal is in collision");

  const double spacing = planner_check_spacing(cloud);
  const double r = query.robot_radius;
  PlanResult result;

  if (!cloud.segment_collides(query.start, query.goal, r, spacing)) {
    result.found = true;
    result.path = {query.start, query.goal};
    result.elapsed_seconds = elapsed();
    return result;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sample = [&]() {
    Vec3 p;
    for (int a = 0; a < 3; ++a) {
      const double lo = std::min(box.min[a] + r, box.max[a]);
      const double hi = std::max(box.max[a] - r, lo);
      p[a] = lo + (hi - lo) * unit(rng);
    }
    return p;
  };

  // One bounded step from the nearest node towards `target`.
  auto extend = [&](Tree& tree, const Vec3& target, std::size_t& added) {
    const std::size_t near = tree.nearest(target);
    const Vec3 from = tree.nodes[near];
    const Vec3 delta = target - from;
    const double d = delta.norm();
    const bool reaches = d <= options.step_size;
    const Vec3 to = reaches ? target : Vec3(from + delta * (options.step_size / d));
    if (cloud.segment_collides(from, to, r, spacing)) return Extend::Trapped;
    added = tree.add(to, static_cast<std::int64_t>(near));
    return reaches ? Extend::Reached : Extend::Advanced;
  };

  Tree a, b;
  a.add(query.start, -1);
  b.add(query.goal, -1);
  bool a_is_start = true;

  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    result.iterations = it + 1;
    if ((it & 15u) == 0 && elapsed() > query.time_budget) break;

    const Vec3 target = unit(rng) < options.goal_bias ? b.nodes.front() : sample();
    std::size_t new_a = 0;
    if (extend(a, target, new_a) != Extend::Trapped) {
      // Greedily connect the other tree to the new node.
      std::size_t new_b = 0;
      Extend status = Extend::Advanced;
      while (status == Extend::Advanced) status = extend(b, a.nodes[new_a], new_b);
      if (status == Extend::Reached) {
        std::vector<Vec3> from_a = a.branch_to_root(new_a);
        std::vector<Vec3> from_b = b.branch_to_root(new_b);
        std::reverse(from_a.begin(), from_a.end());
        // new_b duplicates new_a's position.
        from_a.insert(from_a.end(), from_b.begin() + 1, from_b.end());
        if (!a_is_start) std::reverse(from_a.begin(), from_a.end());
        result.path = options.shortcut ? shortcut_path(cloud, from_a, r) : std::move(from_a);
        result.found = true;
        break;
      }
    }
    std::swap(a, b);
    a_is_start = !a_is_start;
  }
  result.elapsed_seconds = elapsed();
  return result;
}

}  // namespace flightcore
