#pragma once

#include <optional>
#include <vector>

#include "swarm/plan/grid.hpp"

namespace swarm::plan {

inline constexpr int kSnapRadiusCells = 3;

struct PlannedPath {
  std::vector<geom::Vec2> waypoints;  // string-pulled, world coordinates
  std::vector<Cell> cells;            // full 8-connected cell path before smoothing
  int straight_steps = 0;
  int diagonal_steps = 0;
  double cost = 0.0;  // octile cost of `cells`, meters

  double smoothed_length() const;
};

/// Octile cost in meters of `straight` and `diagonal` cell steps.
double octile_cost(int straight, int diagonal, double cell_size);

/// Nearest free cell within the snap radius (Euclidean, in cells); ties go
/// to the lowest row, then the lowest column. Nullopt when none.
std::optional<Cell> snap_to_free(const OccupancyGrid& grid, Layer layer, Cell c);

/// Jump point search, diagonal moves only when both orthogonal neighbours
/// are free. Throws PlanError when start or goal is out of bounds or blocked
/// with no free cell to snap to; nullopt when the goal is unreachable.
std::optional<PlannedPath> jps_plan(const OccupancyGrid& grid, Layer layer, geom::Vec2 start, geom::Vec2 goal);
std::optional<PlannedPath> jps_plan_cells(const OccupancyGrid& grid, Layer layer, Cell start, Cell goal);

/// Greedy string pulling over a cell path: each waypoint reaches as far
/// along the path as line of sight allows.
std::vector<geom::Vec2> string_pull(const OccupancyGrid& grid, Layer layer, const std::vector<Cell>& cells);

}  // namespace swarm::plan
