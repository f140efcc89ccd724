#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "swarm/geom/geometry.hpp"

namespace swarm::geom {

using BuildingId = std::uint32_t;

struct Building {
  BuildingId id = 0;
  std::string label;
  Polygon footprint;
  double height = 10.0;
  bool known = true;  // a-priori scene geometry
};

/// 0 inside the footprint, else distance to its boundary.
double building_distance(const Building& b, Vec2 p);

/// True when the segment a-b passes through any footprint below that
/// building's height (heights interpolated linearly along the segment).
/// With skip_target_building, a footprint containing `b` never blocks: the
/// target is inside and seen through its openings.
bool occluded(std::span<const Building> buildings, Vec3 a, Vec3 b, bool skip_target_building = false);

/// Outward offset of a simple polygon by `d` with mitred corners.
Polygon offset_polygon(std::span<const Vec2> ring, double d);

}  // namespace swarm::geom
