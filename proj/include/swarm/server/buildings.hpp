#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "swarm/geom/scene.hpp"
#include "swarm/msg/messages.hpp"

namespace swarm::server {

/// A building-label tag this far from a footprint still names it.
inline constexpr double kLabelReach = 10.0;

struct BuildingState {
  geom::BuildingId id = 0;
  bool confirmed = false;
  bool contains_threat = false;
  bool contains_intel = false;
  friend bool operator==(const BuildingState&, const BuildingState&) = default;
};

/// Verification state of the scene's buildings, driven by detections.
/// Flags only ever turn on.
class BuildingTracker {
 public:
  explicit BuildingTracker(std::span<const geom::Building> buildings);

  /// Returns the states that changed.
  std::vector<BuildingState> update(const msg::Detection& d);
  /// Explicit confirmation (a completed building scan).
  std::optional<BuildingState> confirm(geom::BuildingId id);

  const BuildingState* find(geom::BuildingId id) const;
  const std::map<geom::BuildingId, BuildingState>& states() const { return states_; }

 private:
  const geom::Building* containing(geom::Vec2 p) const;
  const geom::Building* nearest(geom::Vec2 p, double reach) const;

  std::vector<geom::Building> buildings_;
  std::map<geom::BuildingId, BuildingState> states_;
};

}  // namespace swarm::server
