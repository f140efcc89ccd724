#pragma once

#include <optional>
#include <span>
#include <vector>

#include "swarm/tactics/tactic.hpp"

namespace swarm::tactics {

inline constexpr int kOrbitWaypoints = 8;
inline constexpr double kBuildingStandoff = 5.0;
inline constexpr double kRouteAttach = 15.0;
inline constexpr double kRecoveryRadius = 10.0;
inline constexpr double kDefaultExamineAltitude = 10.0;

/// Built-in library: overhead_scan, follow_route, hold_position,
/// examine_object, safe_land, deploy, scan_building and the negation,
/// conjunction, disjunction and timer gates.
TacticRegistry builtin_tactics();

// Geometry used by the built-ins.

/// Centres of cell_size squares (tiled from the polygon's lower-left bounds
/// corner) that fall inside the polygon, rows bottom to top, alternating
/// direction. A polygon holding no centre yields its centroid.
std::vector<geom::Vec2> lawnmower(std::span<const geom::Vec2> polygon, double cell_size);

/// Splits n items into k contiguous runs whose sizes differ by at most one,
/// longer runs first. Returns run lengths; fewer than k when n < k.
std::vector<std::size_t> partition_runs(std::size_t n, std::size_t k);

/// n stations at arc lengths (i + 0.5) * L / n along the path.
std::vector<geom::Vec3> perimeter_stations(std::span<const geom::Vec3> path, bool closed, std::size_t n);

/// Points on a horizontal circle, starting east and turning counter-clockwise.
std::vector<geom::Vec3> orbit(geom::Vec3 centre, double radius, int count = kOrbitWaypoints);

/// Up to n distinct free ground cells inside the zone, spread evenly through
/// the row-major list of candidates.
std::vector<geom::Vec2> deploy_cells(std::span<const geom::Vec2> zone, const plan::OccupancyGrid& grid, std::size_t n);

/// Recovery-point rule: nearest free, unoccupied cell within 10 m of the
/// recovery point closest to the agent; without a recovery point, the
/// nearest free unoccupied cell to the agent.
std::optional<geom::Vec2> landing_site(const TacticWorld& world, geom::Vec2 agent, std::span<const geom::Vec2> taken = {});

/// Route whose endpoint is within 15 m of the zone, oriented to end there.
std::optional<std::vector<geom::Vec3>> attached_route(const geom::SketchDatabase& db, std::span<const geom::Vec2> zone);

}  // namespace swarm::tactics
