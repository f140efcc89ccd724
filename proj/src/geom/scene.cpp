#include "swarm/geom/scene.hpp"

#include <algorithm>
#include <cmath>

namespace swarm::geom {

double building_distance(const Building& b, Vec2 p) {
  if (point_in_polygon(p, b.footprint)) return 0.0;
  return point_polyline_distance(p, b.footprint, true);
}

bool occluded(std::span<const Building> buildings, Vec3 a, Vec3 b, bool skip_target_building) {
  const Aabb seg{{std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)}};
  for (const auto& bld : buildings) {
    if (!seg.overlaps(bounds(bld.footprint))) continue;
    if (skip_target_building && point_in_polygon(b.xy(), bld.footprint)) continue;
    for (auto [t0, t1] : segment_inside_intervals(a.xy(), b.xy(), bld.footprint)) {
      const double z0 = a.z + (b.z - a.z) * t0;
      const double z1 = a.z + (b.z - a.z) * t1;
      if (std::min(z0, z1) < bld.height) return true;
    }
  }
  return false;
}

Polygon offset_polygon(std::span<const Vec2> ring, double d) {
  const std::size_t n = ring.size();
  if (n < 3) return {ring.begin(), ring.end()};
  // Outward normals depend on winding.
  const double sign = signed_area(ring) >= 0.0 ? 1.0 : -1.0;
  auto normal = [&](std::size_t i) {
    const Vec2 e = ring[(i + 1) % n] - ring[i];
    const double len = norm(e);
    return len > 0.0 ? Vec2{e.y / len, -e.x / len} * sign : Vec2{0.0, 0.0};
  };
  Polygon out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 n0 = normal((i + n - 1) % n);
    const Vec2 n1 = normal(i);
    const Vec2 bis = n0 + n1;
    const double c = dot(bis, n1);
    if (norm(bis) < 1e-12 || c < 1e-6) {
      out.push_back(ring[i] + n1 * d);
      continue;
    }
    // Mitre length so that both offset edges sit at distance d.
    out.push_back(ring[i] + bis * (d / c));
  }
  return out;
}

}  // namespace swarm::geom
