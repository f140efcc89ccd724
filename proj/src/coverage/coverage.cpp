#include "swarm/coverage/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace swarm::coverage {

double fade(double last_seen, double now) { return std::clamp((now - last_seen) / kFadeS, 0.0, 1.0); }

CoverageTable::CoverageTable(double voxel_size) : voxel_(voxel_size) {
  if (!(voxel_size > 0.0)) throw std::invalid_argument("voxel size must be positive");
}

VoxelKey CoverageTable::voxel_of(geom::Vec2 p) const {
  return {static_cast<std::int32_t>(std::floor(p.x / voxel_)), static_cast<std::int32_t>(std::floor(p.y / voxel_))};
}

geom::Vec2 CoverageTable::centre(VoxelKey k) const { return {(k.x + 0.5) * voxel_, (k.y + 0.5) * voxel_}; }

std::size_t CoverageTable::stamp(geom::Vec3 pos, double radius, double now, std::span<const geom::Building> buildings) {
  if (!(radius > 0.0)) throw std::invalid_argument("stamp radius must be positive");
  std::vector<geom::Building> near;
  for (const auto& b : buildings) {
    const auto box = geom::bounds(b.footprint);
    const double dx = std::max({box.min.x - pos.x, 0.0, pos.x - box.max.x});
    const double dy = std::max({box.min.y - pos.y, 0.0, pos.y - box.max.y});
    if (std::hypot(dx, dy) <= radius) near.push_back(b);
  }
  const VoxelKey lo = voxel_of({pos.x - radius, pos.y - radius});
  const VoxelKey hi = voxel_of({pos.x + radius, pos.y + radius});
  std::size_t n = 0;
  for (std::int32_t y = lo.y; y <= hi.y; ++y)
    for (std::int32_t x = lo.x; x <= hi.x; ++x) {
      const geom::Vec2 c = centre({x, y});
      if (std::hypot(c.x - pos.x, c.y - pos.y) > radius) continue;
      if (!near.empty() && geom::occluded(near, pos, {c.x, c.y, 0.0})) continue;
      ++n;
      auto [it, fresh] = table_.try_emplace(pack({x, y}), now);
      if (!fresh) it->second = std::max(it->second, now);
    }
  return n;
}

std::optional<double> CoverageTable::last_seen(VoxelKey k) const {
  auto it = table_.find(pack(k));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> CoverageTable::staleness(VoxelKey k, double now) const {
  auto t = last_seen(k);
  if (!t) return std::nullopt;
  return fade(*t, now);
}

double CoverageTable::coverage_fraction(std::span<const geom::Vec2> region, double now, double max_age) const {
  if (region.size() < 3) return 0.0;
  const auto box = geom::bounds(region);
  const VoxelKey lo = voxel_of(box.min), hi = voxel_of(box.max);
  std::size_t total = 0, seen = 0;
  for (std::int32_t y = lo.y; y <= hi.y; ++y)
    for (std::int32_t x = lo.x; x <= hi.x; ++x) {
      if (!geom::point_in_polygon(centre({x, y}), region)) continue;
      ++total;
      if (auto t = last_seen({x, y}); t && now - *t <= max_age) ++seen;
    }
  return total == 0 ? 0.0 : static_cast<double>(seen) / static_cast<double>(total);
}

msg::GridOverlay CoverageTable::overlay(geom::Vec2 origin, std::uint32_t width, std::uint32_t height, double now) const {
  msg::GridOverlay g;
  g.name = "coverage";
  g.origin = origin;
  g.cell_size = voxel_;
  g.width = width;
  g.height = height;
  g.values.reserve(static_cast<std::size_t>(width) * height);
  const VoxelKey base = voxel_of({origin.x + voxel_ / 2, origin.y + voxel_ / 2});
  for (std::uint32_t y = 0; y < height; ++y)
    for (std::uint32_t x = 0; x < width; ++x) {
      auto t = last_seen({base.x + static_cast<std::int32_t>(x), base.y + static_cast<std::int32_t>(y)});
      g.values.push_back(t ? 1.0 - fade(*t, now) : kNeverSeen);
    }
  return g;
}

}  // namespace swarm::coverage
