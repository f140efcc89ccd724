#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "swarm/geom/geometry.hpp"

namespace swarm::plan {

enum class Layer : std::uint8_t { ground = 0, low_air = 1, high_air = 2 };
inline constexpr int kLayerCount = 3;
/// Upper bound of the low-air band in meters.
inline constexpr double kLowAirCeiling = 20.0;

using LayerMask = std::uint8_t;
inline constexpr LayerMask layer_bit(Layer l) { return static_cast<LayerMask>(1u << static_cast<unsigned>(l)); }
inline constexpr LayerMask kAllLayers = 0b111;

/// Altitude band an agent at `altitude` plans in; ground platforms pass
/// `on_ground`.
Layer layer_for(bool on_ground, double altitude);

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(Cell, Cell) = default;
  friend auto operator<=>(Cell, Cell) = default;
};

struct BuildingFootprint {
  geom::Polygon footprint;
  double height = 10.0;
};

struct NoGoShape {
  std::vector<geom::Vec2> vertices;
  bool closed = true;  // closed: interior blocked; open: the line itself
  LayerMask layers = kAllLayers;
};

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform grid with one blocked bitmap per altitude layer.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(geom::Vec2 origin, double cell_size, int width, int height);

  geom::Vec2 origin() const { return origin_; }
  double cell_size() const { return cell_size_; }
  int width() const { return width_; }
  int height() const { return height_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  /// Out-of-bounds cells count as blocked.
  bool blocked(Layer l, Cell c) const {
    return !in_bounds(c) || bits_[static_cast<int>(l)][index(c)] != 0;
  }
  bool free(Layer l, Cell c) const { return !blocked(l, c); }
  void set_blocked(Layer l, Cell c, bool b = true);
  std::size_t blocked_count(Layer l) const;

  geom::Vec2 center(Cell c) const;
  /// Cell containing `p`; may be out of bounds.
  Cell cell_of(geom::Vec2 p) const;
  /// Grid coordinates (cell units, origin at the grid corner).
  geom::Vec2 to_grid(geom::Vec2 p) const;

 private:
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.x); }

  geom::Vec2 origin_{};
  double cell_size_ = 1.0;
  int width_ = 0;
  int height_ = 0;
  std::array<std::vector<std::uint8_t>, kLayerCount> bits_;
};

struct RasterSpec {
  geom::Vec2 origin{};
  double cell_size = 1.0;
  int width = 0;
  int height = 0;
};

/// Blocks every cell whose centre lies inside an obstacle. Buildings block
/// ground and low-air, and high-air too when taller than the low-air ceiling,
/// with a 1-cell 8-neighbour inflation. Closed no-go shapes block their
/// interior, open ones every cell their lines touch, in the declared layers.
OccupancyGrid rasterize(const RasterSpec& spec, std::span<const BuildingFootprint> buildings,
                        std::span<const NoGoShape> zones);

/// Cells whose closed square meets the segment a-b (world coordinates),
/// including both neighbours at exact corner crossings.
std::vector<Cell> supercover(const OccupancyGrid& grid, geom::Vec2 a, geom::Vec2 b);

/// True when no cell of the segment's supercover is blocked in `layer`.
bool line_of_sight(const OccupancyGrid& grid, Layer layer, geom::Vec2 a, geom::Vec2 b);

}  // namespace swarm::plan
