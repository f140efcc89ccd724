#include "swarm/server/buildings.hpp"

namespace swarm::server {

using msg::ArtifactRole;

BuildingTracker::BuildingTracker(std::span<const geom::Building> buildings)
    : buildings_(buildings.begin(), buildings.end()) {
  for (const auto& b : buildings_) states_[b.id] = BuildingState{b.id};
}

const geom::Building* BuildingTracker::containing(geom::Vec2 p) const {
  for (const auto& b : buildings_) {
    if (geom::point_in_polygon(p, b.footprint)) return &b;
  }
  return nullptr;
}

const geom::Building* BuildingTracker::nearest(geom::Vec2 p, double reach) const {
  const geom::Building* best = nullptr;
  double best_d = reach;
  for (const auto& b : buildings_) {
    double d = geom::building_distance(b, p);
    if (d <= best_d && (!best || d < best_d)) {
      best = &b;
      best_d = d;
    }
  }
  return best;
}

std::vector<BuildingState> BuildingTracker::update(const msg::Detection& d) {
  std::vector<BuildingState> changed;
  auto apply = [&](const geom::Building* b, bool BuildingState::*flag) {
    if (!b) return;
    auto& st = states_[b->id];
    if (st.*flag) return;
    st.*flag = true;
    changed.push_back(st);
  };
  geom::Vec2 p = d.position.xy();
  if (d.role == ArtifactRole::building_label) apply(nearest(p, kLabelReach), &BuildingState::confirmed);
  // Hostile and HVT only show up as "person" until the inner tag is read.
  if (d.inner_id && (d.role == ArtifactRole::hostile || d.role == ArtifactRole::hvt)) {
    apply(containing(p), &BuildingState::contains_threat);
  }
  if (d.role == ArtifactRole::intel) apply(containing(p), &BuildingState::contains_intel);
  return changed;
}

std::optional<BuildingState> BuildingTracker::confirm(geom::BuildingId id) {
  auto it = states_.find(id);
  if (it == states_.end() || it->second.confirmed) return std::nullopt;
  it->second.confirmed = true;
  return it->second;
}

const BuildingState* BuildingTracker::find(geom::BuildingId id) const {
  auto it = states_.find(id);
  return it == states_.end() ? nullptr : &it->second;
}

}  // namespace swarm::server
