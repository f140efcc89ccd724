#include "swarm/plan/jps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <queue>

namespace swarm::plan {

double PlannedPath::smoothed_length() const {
  double s = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) s += geom::distance(waypoints[i - 1], waypoints[i]);
  return s;
}

double octile_cost(int straight, int diagonal, double cell_size) {
  return (straight + diagonal * std::numbers::sqrt2) * cell_size;
}

std::optional<Cell> snap_to_free(const OccupancyGrid& grid, Layer layer, Cell c) {
  if (grid.free(layer, c)) return c;
  std::optional<Cell> best;
  int best_d2 = std::numeric_limits<int>::max();
  const int r = kSnapRadiusCells;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const int d2 = dx * dx + dy * dy;
      if (d2 > r * r || d2 >= best_d2) continue;
      const Cell n{c.x + dx, c.y + dy};
      if (grid.free(layer, n)) {
        best = n;
        best_d2 = d2;
      }
    }
  return best;
}

namespace {

class Search {
 public:
  Search(const OccupancyGrid& g, Layer l, Cell goal) : g_(g), layer_(l), goal_(goal) {}

  bool free(int x, int y) const { return g_.free(layer_, {x, y}); }

  std::optional<Cell> jump(int x, int y, int dx, int dy) const {
    for (;;) {
      if (!free(x, y)) return std::nullopt;
      if (Cell{x, y} == goal_) return Cell{x, y};
      if (dx != 0 && dy != 0) {
        if (jump(x + dx, y, dx, 0) || jump(x, y + dy, 0, dy)) return Cell{x, y};
        if (!(free(x + dx, y) && free(x, y + dy))) return std::nullopt;
      } else if (dx != 0) {
        if ((free(x, y - 1) && !free(x - dx, y - 1)) || (free(x, y + 1) && !free(x - dx, y + 1)))
          return Cell{x, y};
      } else {
        if ((free(x - 1, y) && !free(x - 1, y - dy)) || (free(x + 1, y) && !free(x + 1, y - dy)))
          return Cell{x, y};
      }
      x += dx;
      y += dy;
    }
  }

  void neighbours(Cell c, std::optional<Cell> parent, std::vector<Cell>& out) const {
    out.clear();
    const int x = c.x, y = c.y;
    auto push = [&](int nx, int ny) { out.push_back({nx, ny}); };
    if (!parent) {
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (!free(x + dx, y + dy)) continue;
          if (dx != 0 && dy != 0 && !(free(x + dx, y) && free(x, y + dy))) continue;
          push(x + dx, y + dy);
        }
      return;
    }
    const int dx = (x > parent->x) - (x < parent->x);
    const int dy = (y > parent->y) - (y < parent->y);
    if (dx != 0 && dy != 0) {
      const bool v = free(x, y + dy), h = free(x + dx, y);
      if (v) push(x, y + dy);
      if (h) push(x + dx, y);
      if (v && h) push(x + dx, y + dy);
    } else if (dx != 0) {
      const bool next = free(x + dx, y), up = free(x, y + 1), down = free(x, y - 1);
      if (next) {
        push(x + dx, y);
        if (up) push(x + dx, y + 1);
        if (down) push(x + dx, y - 1);
      }
      if (up) push(x, y + 1);
      if (down) push(x, y - 1);
    } else {
      const bool next = free(x, y + dy), right = free(x + 1, y), left = free(x - 1, y);
      if (next) {
        push(x, y + dy);
        if (right) push(x + 1, y + dy);
        if (left) push(x - 1, y + dy);
      }
      if (right) push(x + 1, y);
      if (left) push(x - 1, y);
    }
  }

 private:
  const OccupancyGrid& g_;
  Layer layer_;
  Cell goal_;
};

double octile(Cell a, Cell b) {
  const int dx = std::abs(a.x - b.x), dy = std::abs(a.y - b.y);
  return std::max(dx, dy) + (std::numbers::sqrt2 - 1.0) * std::min(dx, dy);
}

std::vector<Cell> expand(const std::vector<Cell>& jumps) {
  std::vector<Cell> out;
  if (jumps.empty()) return out;
  out.push_back(jumps.front());
  for (std::size_t i = 1; i < jumps.size(); ++i) {
    Cell c = jumps[i - 1];
    const Cell t = jumps[i];
    const int dx = (t.x > c.x) - (t.x < c.x), dy = (t.y > c.y) - (t.y < c.y);
    while (!(c == t)) {
      c.x += dx;
      c.y += dy;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::optional<PlannedPath> jps_plan_cells(const OccupancyGrid& grid, Layer layer, Cell start, Cell goal) {
  if (!grid.in_bounds(start) || !grid.in_bounds(goal)) throw PlanError("start or goal outside the grid");
  const auto s = snap_to_free(grid, layer, start);
  const auto t = snap_to_free(grid, layer, goal);
  if (!s) throw PlanError("start is blocked with no free cell within 3 cells");
  if (!t) throw PlanError("goal is blocked with no free cell within 3 cells");
  start = *s;
  goal = *t;

  const std::size_t w = static_cast<std::size_t>(grid.width());
  const std::size_t n = w * static_cast<std::size_t>(grid.height());
  auto idx = [&](Cell c) { return static_cast<std::size_t>(c.y) * w + static_cast<std::size_t>(c.x); };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> g(n, kInf);
  std::vector<std::int32_t> parent(n, -1);
  std::vector<char> closed(n, 0);

  struct Open {
    double f;
    std::uint64_t order;
    Cell c;
    bool operator>(const Open& o) const { return f != o.f ? f > o.f : order > o.order; }
  };
  std::priority_queue<Open, std::vector<Open>, std::greater<>> open;
  std::uint64_t order = 0;
  Search search(grid, layer, goal);

  g[idx(start)] = 0.0;
  open.push({octile(start, goal), order++, start});
  std::vector<Cell> nbrs;
  bool found = false;
  while (!open.empty()) {
    const Open top = open.top();
    open.pop();
    const std::size_t ci = idx(top.c);
    if (closed[ci] != 0) continue;
    closed[ci] = 1;
    if (top.c == goal) {
      found = true;
      break;
    }
    std::optional<Cell> par;
    if (parent[ci] >= 0)
      par = Cell{static_cast<int>(static_cast<std::size_t>(parent[ci]) % w),
                 static_cast<int>(static_cast<std::size_t>(parent[ci]) / w)};
    search.neighbours(top.c, par, nbrs);
    for (const Cell nb : nbrs) {
      const auto jp = search.jump(nb.x, nb.y, nb.x - top.c.x, nb.y - top.c.y);
      if (!jp) continue;
      const std::size_t ji = idx(*jp);
      if (closed[ji] != 0) continue;
      const double ng = g[ci] + octile(top.c, *jp);
      if (ng < g[ji]) {
        g[ji] = ng;
        parent[ji] = static_cast<std::int32_t>(ci);
        open.push({ng + octile(*jp, goal), order++, *jp});
      }
    }
  }
  if (!found) return std::nullopt;

  std::vector<Cell> jumps;
  for (std::int64_t i = static_cast<std::int64_t>(idx(goal)); i >= 0; i = parent[static_cast<std::size_t>(i)])
    jumps.push_back({static_cast<int>(static_cast<std::size_t>(i) % w), static_cast<int>(static_cast<std::size_t>(i) / w)});
  std::reverse(jumps.begin(), jumps.end());

  PlannedPath path;
  path.cells = expand(jumps);
  for (std::size_t i = 1; i < path.cells.size(); ++i) {
    const bool diag = path.cells[i].x != path.cells[i - 1].x && path.cells[i].y != path.cells[i - 1].y;
    ++(diag ? path.diagonal_steps : path.straight_steps);
  }
  path.cost = octile_cost(path.straight_steps, path.diagonal_steps, grid.cell_size());
  path.waypoints = string_pull(grid, layer, path.cells);
  return path;
}

std::optional<PlannedPath> jps_plan(const OccupancyGrid& grid, Layer layer, geom::Vec2 start, geom::Vec2 goal) {
  return jps_plan_cells(grid, layer, grid.cell_of(start), grid.cell_of(goal));
}

std::vector<geom::Vec2> string_pull(const OccupancyGrid& grid, Layer layer, const std::vector<Cell>& cells) {
  std::vector<geom::Vec2> out;
  if (cells.empty()) return out;
  out.push_back(grid.center(cells.front()));
  std::size_t anchor = 0;
  while (anchor + 1 < cells.size()) {
    std::size_t reach = anchor + 1;
    while (reach + 1 < cells.size() &&
           line_of_sight(grid, layer, grid.center(cells[anchor]), grid.center(cells[reach + 1])))
      ++reach;
    out.push_back(grid.center(cells[reach]));
    anchor = reach;
  }
  return out;
}

}  // namespace swarm::plan
