#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>

#include "swarm/geom/scene.hpp"
#include "swarm/msg/messages.hpp"

namespace swarm::coverage {

inline constexpr double kVoxelSize = 1.0;
inline constexpr double kFadeS = 1200.0;
inline constexpr double kSensorRadius = 20.0;
/// Overlay value for voxels nobody has seen.
inline constexpr double kNeverSeen = -1.0;

struct VoxelKey {
  std::int32_t x = 0;
  std::int32_t y = 0;
  friend bool operator==(const VoxelKey&, const VoxelKey&) = default;
};

/// Fade fraction: 0 just seen, 1 after twenty minutes or more.
double fade(double last_seen, double now);

/// Ground-plane voxel hash: voxel id -> last time any agent saw it.
class CoverageTable {
 public:
  explicit CoverageTable(double voxel_size = kVoxelSize);

  double voxel_size() const { return voxel_; }
  VoxelKey voxel_of(geom::Vec2 p) const;
  geom::Vec2 centre(VoxelKey k) const;

  /// Stamps every voxel whose centre is inside the disk around `pos` and
  /// visible from it. Timestamps only move forward. Returns how many voxels
  /// were inside the disk and visible.
  std::size_t stamp(geom::Vec3 pos, double radius, double now, std::span<const geom::Building> buildings = {});

  std::optional<double> last_seen(VoxelKey k) const;
  /// nullopt for never seen.
  std::optional<double> staleness(VoxelKey k, double now) const;
  /// Share of the region's voxels (centre inside) seen within max_age.
  double coverage_fraction(std::span<const geom::Vec2> region, double now, double max_age) const;

  /// Values are 1 - fade, or kNeverSeen.
  msg::GridOverlay overlay(geom::Vec2 origin, std::uint32_t width, std::uint32_t height, double now) const;

  std::size_t size() const { return table_.size(); }

 private:
  static std::uint64_t pack(VoxelKey k) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.x)) << 32) | static_cast<std::uint32_t>(k.y);
  }

  double voxel_;
  std::unordered_map<std::uint64_t, double> table_;
};

}  // namespace swarm::coverage
