#include "swarm/plan/grid.hpp"

#include <algorithm>
#include <cmath>

namespace swarm::plan {

namespace {

constexpr double kEps = 1e-9;

// Visits the cells of a grid-space segment, row band by row band.
template <class F>
void walk_supercover(geom::Vec2 a, geom::Vec2 b, F&& visit) {
  const double ymin = std::min(a.y, b.y);
  const double ymax = std::max(a.y, b.y);
  const int r0 = static_cast<int>(std::ceil(ymin - kEps)) - 1;
  const int r1 = static_cast<int>(std::floor(ymax + kEps));
  for (int r = r0; r <= r1; ++r) {
    const double lo = std::max(static_cast<double>(r), ymin);
    const double hi = std::min(static_cast<double>(r + 1), ymax);
    if (lo > hi + kEps) continue;
    double xa, xb;
    if (b.y == a.y) {
      xa = a.x;
      xb = b.x;
    } else {
      const double t0 = std::clamp((lo - a.y) / (b.y - a.y), 0.0, 1.0);
      const double t1 = std::clamp((hi - a.y) / (b.y - a.y), 0.0, 1.0);
      xa = a.x + (b.x - a.x) * t0;
      xb = a.x + (b.x - a.x) * t1;
    }
    const double xlo = std::min(xa, xb);
    const double xhi = std::max(xa, xb);
    const int c0 = static_cast<int>(std::ceil(xlo - kEps)) - 1;
    const int c1 = static_cast<int>(std::floor(xhi + kEps));
    for (int c = c0; c <= c1; ++c)
      if (!visit(Cell{c, r})) return;
  }
}

}  // namespace

Layer layer_for(bool on_ground, double altitude) {
  if (on_ground) return Layer::ground;
  return altitude <= kLowAirCeiling ? Layer::low_air : Layer::high_air;
}

OccupancyGrid::OccupancyGrid(geom::Vec2 origin, double cell_size, int width, int height)
    : origin_(origin), cell_size_(cell_size), width_(width), height_(height) {
  if (!(cell_size > 0.0)) throw PlanError("cell size must be positive");
  if (width < 0 || height < 0) throw PlanError("grid dimensions must be nonnegative");
  for (auto& b : bits_) b.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

void OccupancyGrid::set_blocked(Layer l, Cell c, bool b) {
  if (!in_bounds(c)) return;
  bits_[static_cast<int>(l)][index(c)] = b ? 1 : 0;
}

std::size_t OccupancyGrid::blocked_count(Layer l) const {
  const auto& v = bits_[static_cast<int>(l)];
  return static_cast<std::size_t>(std::count(v.begin(), v.end(), 1));
}

geom::Vec2 OccupancyGrid::center(Cell c) const {
  return {origin_.x + (c.x + 0.5) * cell_size_, origin_.y + (c.y + 0.5) * cell_size_};
}

geom::Vec2 OccupancyGrid::to_grid(geom::Vec2 p) const {
  return {(p.x - origin_.x) / cell_size_, (p.y - origin_.y) / cell_size_};
}

Cell OccupancyGrid::cell_of(geom::Vec2 p) const {
  const auto g = to_grid(p);
  return {static_cast<int>(std::floor(g.x)), static_cast<int>(std::floor(g.y))};
}

namespace {

void fill_polygon(OccupancyGrid& g, const geom::Polygon& poly, std::vector<Cell>& out) {
  if (poly.size() < 3) return;
  const auto box = geom::bounds(poly);
  const Cell lo = g.cell_of(box.min);
  const Cell hi = g.cell_of(box.max);
  for (int y = std::max(lo.y, 0); y <= std::min(hi.y, g.height() - 1); ++y)
    for (int x = std::max(lo.x, 0); x <= std::min(hi.x, g.width() - 1); ++x)
      if (geom::point_in_polygon(g.center({x, y}), poly)) out.push_back({x, y});
}

}  // namespace

OccupancyGrid rasterize(const RasterSpec& spec, std::span<const BuildingFootprint> buildings,
                        std::span<const NoGoShape> zones) {
  OccupancyGrid g(spec.origin, spec.cell_size, spec.width, spec.height);
  std::vector<Cell> cells;
  for (const auto& b : buildings) {
    cells.clear();
    fill_polygon(g, b.footprint, cells);
    const bool tall = b.height > kLowAirCeiling;
    for (const auto c : cells)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const Cell n{c.x + dx, c.y + dy};
          g.set_blocked(Layer::ground, n);
          g.set_blocked(Layer::low_air, n);
          if (tall) g.set_blocked(Layer::high_air, n);
        }
  }
  for (const auto& z : zones) {
    cells.clear();
    if (z.closed && z.vertices.size() >= 3) {
      fill_polygon(g, z.vertices, cells);
    } else {
      for (std::size_t i = 0; i + 1 < z.vertices.size(); ++i) {
        auto seg = supercover(g, z.vertices[i], z.vertices[i + 1]);
        cells.insert(cells.end(), seg.begin(), seg.end());
      }
      if (z.vertices.size() == 1) cells.push_back(g.cell_of(z.vertices[0]));
    }
    for (int l = 0; l < kLayerCount; ++l)
      if ((z.layers & (1u << l)) != 0)
        for (const auto c : cells) g.set_blocked(static_cast<Layer>(l), c);
  }
  return g;
}

std::vector<Cell> supercover(const OccupancyGrid& grid, geom::Vec2 a, geom::Vec2 b) {
  std::vector<Cell> out;
  walk_supercover(grid.to_grid(a), grid.to_grid(b), [&](Cell c) {
    out.push_back(c);
    return true;
  });
  return out;
}

bool line_of_sight(const OccupancyGrid& grid, Layer layer, geom::Vec2 a, geom::Vec2 b) {
  bool clear = true;
  walk_supercover(grid.to_grid(a), grid.to_grid(b), [&](Cell c) {
    if (grid.blocked(layer, c)) clear = false;
    return clear;
  });
  return clear;
}

}  // namespace swarm::plan
