#include "swarm/tactics/library.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace swarm::tactics {

using geom::Vec2;
using geom::Vec3;
using msg::PlatformKind;

// ---------------------------------------------------------------------------
// Geometry

std::vector<Vec2> lawnmower(std::span<const Vec2> polygon, double cell_size) {
  if (!(cell_size > 0.0)) throw TacticError("cell size must be positive");
  if (polygon.size() < 3) throw TacticError("scan area needs a closed polygon");
  const auto box = geom::bounds(polygon);
  const int cols = std::max(1, static_cast<int>(std::ceil((box.max.x - box.min.x) / cell_size - 1e-9)));
  const int rows = std::max(1, static_cast<int>(std::ceil((box.max.y - box.min.y) / cell_size - 1e-9)));
  std::vector<Vec2> out;
  int emitted_rows = 0;
  for (int r = 0; r < rows; ++r) {
    std::vector<Vec2> row;
    for (int c = 0; c < cols; ++c) {
      const Vec2 p{box.min.x + (c + 0.5) * cell_size, box.min.y + (r + 0.5) * cell_size};
      if (geom::point_in_polygon(p, polygon)) row.push_back(p);
    }
    if (row.empty()) continue;
    if (emitted_rows % 2 == 1) std::reverse(row.begin(), row.end());
    out.insert(out.end(), row.begin(), row.end());
    ++emitted_rows;
  }
  if (out.empty()) out.push_back(geom::centroid(polygon));
  return out;
}

std::vector<std::size_t> partition_runs(std::size_t n, std::size_t k) {
  std::vector<std::size_t> out;
  if (k == 0 || n == 0) return out;
  k = std::min(k, n);
  const std::size_t base = n / k, extra = n % k;
  for (std::size_t i = 0; i < k; ++i) out.push_back(base + (i < extra ? 1 : 0));
  return out;
}

std::vector<Vec3> perimeter_stations(std::span<const Vec3> path, bool closed, std::size_t n) {
  std::vector<Vec3> out;
  if (path.empty() || n == 0) return out;
  const double total = geom::polyline_length_2d(path, closed);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(geom::point_at_arc_length(path, closed, (static_cast<double>(i) + 0.5) * total / static_cast<double>(n)));
  return out;
}

std::vector<Vec3> orbit(Vec3 centre, double radius, int count) {
  std::vector<Vec3> out;
  for (int i = 0; i < count; ++i) {
    const double a = 2.0 * std::numbers::pi * i / count;
    out.push_back({centre.x + radius * std::cos(a), centre.y + radius * std::sin(a), centre.z});
  }
  return out;
}

std::vector<Vec2> deploy_cells(std::span<const Vec2> zone, const plan::OccupancyGrid& grid, std::size_t n) {
  std::vector<plan::Cell> candidates;
  const auto box = geom::bounds(zone);
  const auto lo = grid.cell_of(box.min), hi = grid.cell_of(box.max);
  for (int y = std::max(lo.y, 0); y <= std::min(hi.y, grid.height() - 1); ++y)
    for (int x = std::max(lo.x, 0); x <= std::min(hi.x, grid.width() - 1); ++x)
      if (grid.free(plan::Layer::ground, {x, y}) && geom::point_in_polygon(grid.center({x, y}), zone))
        candidates.push_back({x, y});
  std::vector<Vec2> out;
  const std::size_t m = candidates.size();
  if (m == 0 || n == 0) return out;
  if (n >= m) {
    for (auto c : candidates) out.push_back(grid.center(c));
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>((static_cast<double>(i) + 0.5) * static_cast<double>(m) / static_cast<double>(n));
    out.push_back(grid.center(candidates[std::min(idx, m - 1)]));
  }
  return out;
}

namespace {

std::optional<Vec2> nearest_free_cell(const plan::OccupancyGrid& grid, Vec2 target, double radius,
                                      const std::vector<Vec2>& occupied) {
  const plan::Cell c0 = grid.cell_of(target);
  const int r = static_cast<int>(std::ceil(radius / grid.cell_size())) + 1;
  std::optional<Vec2> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int y = c0.y - r; y <= c0.y + r; ++y)
    for (int x = c0.x - r; x <= c0.x + r; ++x) {
      const plan::Cell c{x, y};
      if (grid.blocked(plan::Layer::ground, c)) continue;
      const Vec2 p = grid.center(c);
      const double d = geom::distance(p, target);
      if (d > radius || d >= best_d) continue;
      bool taken = false;
      for (const auto& o : occupied)
        if (grid.cell_of(o) == c) taken = true;
      if (taken) continue;
      best_d = d;
      best = p;
    }
  return best;
}

}  // namespace

std::optional<Vec2> landing_site(const TacticWorld& world, Vec2 agent, std::span<const Vec2> taken) {
  std::vector<Vec2> occupied(world.occupied.begin(), world.occupied.end());
  occupied.insert(occupied.end(), taken.begin(), taken.end());
  std::optional<Vec2> recovery;
  if (world.sketches != nullptr) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto* s : world.sketches->of_type("recovery_point")) {
      const Vec2 p = std::get<geom::SketchPoint>(*s).position.xy();
      if (geom::distance(p, agent) < best) {
        best = geom::distance(p, agent);
        recovery = p;
      }
    }
  }
  if (world.ground_grid == nullptr) return recovery.value_or(agent);
  if (recovery) {
    if (auto p = nearest_free_cell(*world.ground_grid, *recovery, kRecoveryRadius, occupied)) return p;
  }
  return nearest_free_cell(*world.ground_grid, agent, 60.0, occupied);
}

std::optional<std::vector<Vec3>> attached_route(const geom::SketchDatabase& db, std::span<const Vec2> zone) {
  auto dist = [&](Vec2 p) {
    if (geom::point_in_polygon(p, zone)) return 0.0;
    return geom::point_polyline_distance(p, zone, true);
  };
  std::optional<std::vector<Vec3>> best;
  double best_d = kRouteAttach;
  for (const auto* s : db.of_type("route")) {
    const auto& line = std::get<geom::SketchPolyline>(*s);
    if (line.vertices.size() < 2) continue;
    const double df = dist(line.vertices.front().xy()), db_ = dist(line.vertices.back().xy());
    const double d = std::min(df, db_);
    if (d > best_d || (best && d == best_d)) continue;
    best_d = d;
    auto v = line.vertices;
    if (df < db_) std::reverse(v.begin(), v.end());
    best = std::move(v);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Tactics

namespace {

const std::vector<PlatformKind> kAir{PlatformKind::quad, PlatformKind::vtol};
const std::vector<PlatformKind> kHover{PlatformKind::quad};
const std::vector<PlatformKind> kGround{PlatformKind::ugv};

std::vector<Vec3> sketch_vertices(const geom::Sketch& s, bool* closed = nullptr) {
  if (const auto* p = std::get_if<geom::SketchPoint>(&s)) {
    if (closed != nullptr) *closed = false;
    return {p->position};
  }
  const auto& l = std::get<geom::SketchPolyline>(s);
  if (closed != nullptr) *closed = l.closed;
  return l.vertices;
}

const geom::Sketch& require_sketch(TacticContext& ctx) {
  const auto* s = ctx.context_sketch();
  if (s == nullptr) throw TacticError(ctx.instance.definition->name + ": context sketch no longer exists");
  return *s;
}

std::size_t positive_count(TacticContext& ctx, const char* name) {
  const auto n = ctx.instance.integer(name);
  if (n < 1) throw TacticError(std::string(name) + " must be at least 1");
  return static_cast<std::size_t>(n);
}

wire::Value point_value(Vec3 p) { return msg::to_value(p); }

class OverheadScan : public Tactic {
 public:
  void start(TacticContext& ctx) override {
    const double alt = ctx.instance.real("altitude");
    const double cell = ctx.instance.real("cell_size");
    const auto n = positive_count(ctx, "agent_count");
    if (!(alt > 0.0)) throw TacticError("altitude must be positive");
    const auto ring = geom::to_2d(sketch_vertices(require_sketch(ctx)));
    const auto wps = lawnmower(ring, cell);
    std::size_t at = 0;
    for (std::size_t len : partition_runs(wps.size(), n)) {
      TaskSpec t;
      t.platforms = kAir;
      for (std::size_t i = at; i < at + len; ++i) t.waypoints.push_back({wps[i].x, wps[i].y, alt});
      at += len;
      ctx.queue(std::move(t));
    }
  }
};

class FollowRoute : public Tactic {
 public:
  void start(TacticContext& ctx) override {
    const double alt = ctx.instance.real("altitude");
    const double dist = ctx.instance.real("distance");
    if (dist < 0.0) throw TacticError("distance must be nonnegative");
    auto v = sketch_vertices(require_sketch(ctx));
    for (auto& p : v) p.z = alt;
    points_ = geom::simplify(v, dist);
    chaining_ = ctx.instance.boolean("use_chaining");
    if (!chaining_) {
      TaskSpec t;
      t.waypoints = points_;
      ctx.queue(std::move(t));
      return;
    }
    next_ = 0;
    issue_next(ctx, std::nullopt);
  }

  void on_task_complete(TacticContext& ctx, JobId, AgentId agent) override {
    if (chaining_) issue_next(ctx, agent);
  }
  void on_task_failure(TacticContext&, JobId) override { broken_ = true; }
  void on_bidding_failure(TacticContext&, JobId) override { broken_ = true; }
  void on_task_cancelled(TacticContext&, JobId) override { broken_ = true; }

  std::optional<TacticState> poll(TacticContext& ctx, const ChildSummary& c) override {
    if (!chaining_) return Tactic::poll(ctx, c);
    if (c.live > 0) return std::nullopt;
    if (broken_) return TacticState::failed;
    return next_ >= points_.size() ? std::optional(TacticState::completed) : std::nullopt;
  }

 private:
  void issue_next(TacticContext& ctx, std::optional<AgentId> agent) {
    if (next_ >= points_.size()) return;
    TaskSpec t;
    t.waypoints = {points_[next_++]};
    if (agent) t.selection = {*agent};
    ctx.queue(std::move(t));
  }

  std::vector<Vec3> points_;
  bool chaining_ = false;
  bool broken_ = false;
  std::size_t next_ = 0;
};

class HoldPosition : public Tactic {
 public:
  void start(TacticContext& ctx) override {
    const double alt = ctx.instance.real("altitude");
    const double hold = ctx.instance.real("duration");
    const auto n = positive_count(ctx, "agent_count");
    if (hold < 0.0) throw TacticError("duration must be nonnegative");
    bool closed = false;
    const auto path = sketch_vertices(require_sketch(ctx), &closed);
    const auto flat = geom::to_2d(path);
    Vec2 mid{};
    if (closed && flat.size() >= 3) {
      mid = geom::centroid(flat);
    } else {
      for (auto p : flat) mid = mid + p;
      mid = mid * (1.0 / static_cast<double>(flat.size()));
    }
    for (const auto& s : perimeter_stations(path, closed, n)) {
      TaskSpec t;
      t.platforms = {PlatformKind::quad, PlatformKind::ugv};
      t.waypoints = {{s.x, s.y, alt}};
      t.params = {{"hold_s", hold}, {"face", point_value({mid.x, mid.y, alt})}};
      ctx.queue(std::move(t));
    }
  }
};

class ExamineObject : public Tactic {
 public:
  void start(TacticContext& ctx) override {
    const double radius = ctx.instance.real("radius");
    if (!(radius > 0.0)) throw TacticError("radius must be positive");
    Vec3 poi = sketch_vertices(require_sketch(ctx)).front();
    if (poi.z <= 0.0) poi.z = kDefaultExamineAltitude;
    TaskSpec t;
    t.platforms = kHover;
    t.waypoints = orbit(poi, radius);
    t.params = {{"face", point_value(poi)}};
    ctx.queue(std::move(t));
  }
};

class SafeLand : public Tactic {
 public:
  void start(TacticContext& ctx) override {
    if (!ctx.instance.selection || ctx.instance.selection->empty())
      throw TacticError("safe_land needs a selected air agent");
    std::vector<Vec2> taken;
    for (AgentId a : *ctx.instance.selection) {
      const msg::AgentEntry* e = ctx.world.agents != nullptr ? ctx.world.agents->find(a) : nullptr;
      if (e == nullptr || !msg::is_air(e->last.platform)) continue;
      const auto site = landing_site(ctx.world, e->last.position.xy(), taken);
      if (!site) continue;
      taken.push_back(*site);
      TaskSpec t;
      t.platforms = kAir;
      t.selection = {a};
      t.waypoints = {{site->x, site->y, 0.0}};
      t.params = {{"land", true}};
      ctx.queue(std::move(t));
    }
    if (taken.empty()) throw TacticError("safe_land: no known air agent in the selection");
  }
};

class Deploy : public Tactic {
 public:
  void start(TacticContext& ctx) override {
    const auto n = positive_count(ctx, "agent_count");
    const auto zone = geom::to_2d(sketch_vertices(require_sketch(ctx)));
    if (ctx.world.ground_grid == nullptr) throw TacticError("deploy needs the ground planning grid");
    const auto cells = deploy_cells(zone, *ctx.world.ground_grid, n);
    if (cells.empty()) throw TacticError("deploy zone has no free ground cell");
    std::optional<std::vector<Vec3>> route;
    if (ctx.world.sketches != nullptr) route = attached_route(*ctx.world.sketches, zone);
    for (const auto& c : cells) {
      TaskSpec t;
      t.platforms = kGround;
      if (route)
        for (const auto& p : *route) t.waypoints.push_back({p.x, p.y, 0.0});
      t.waypoints.push_back({c.x, c.y, 0.0});
      ctx.queue(std::move(t));
    }
  }
};

class ScanBuilding : public Tactic {
 public:
  void start(TacticContext& ctx) override {
    const auto* b = ctx.context_building();
    if (b == nullptr) throw TacticError("scan_building: building not found");
    const double alt = ctx.instance.real("altitude");
    building_ = b->id;
    TaskSpec t;
    t.platforms = kHover;
    for (const auto& p : geom::offset_polygon(b->footprint, kBuildingStandoff)) t.waypoints.push_back({p.x, p.y, alt});
    if (!t.waypoints.empty()) t.waypoints.push_back(t.waypoints.front());
    ctx.queue(std::move(t));
  }
  void on_task_complete(TacticContext& ctx, JobId, AgentId) override {
    if (ctx.world.confirm_building) ctx.world.confirm_building(building_);
  }

 private:
  geom::BuildingId building_ = 0;
};

class Gate : public Tactic {
 public:
  explicit Gate(GateKind k) : kind_(k) {}
  Readiness prerequisites(std::span<const TacticState> parents) const override { return gate_readiness(kind_, parents); }
  void start(TacticContext&) override {}

 private:
  GateKind kind_;
};

class Timer : public Tactic {
 public:
  void start(TacticContext& ctx) override {
    delay_ = ctx.instance.real("delay");
    if (delay_ < 0.0) throw TacticError("delay must be nonnegative");
    started_ = ctx.now;
  }
  std::optional<TacticState> poll(TacticContext& ctx, const ChildSummary&) override {
    if (ctx.now >= started_ + delay_ - 1e-9) return TacticState::completed;
    return std::nullopt;
  }

 private:
  double delay_ = 0.0;
  double started_ = 0.0;
};

ParamSpec real_param(std::string name, std::string desc, double def) {
  return {std::move(name), std::move(desc), ParamDataType::real, def};
}
ParamSpec int_param(std::string name, std::string desc, std::int64_t def) {
  return {std::move(name), std::move(desc), ParamDataType::integer, wire::Value(static_cast<long long>(def))};
}

template <class T>
TacticFactory make() {
  return [] { return std::make_unique<T>(); };
}

}  // namespace

TacticRegistry builtin_tactics() {
  TacticRegistry r;
  const std::string altitude_desc = "Height in meters that UAV will assume.";
  r.add({"overhead_scan", "Overhead Scan", "Fly UAVs over area to find artifacts.", "circle", {"explore_area", "sector"},
         {real_param("altitude", altitude_desc, 30.0),
          real_param("cell_size", "Minimum linear distance between waypoints in meters.", 15.0),
          int_param("agent_count", "Number of agents used to scan area.", 4)}},
        make<OverheadScan>());
  r.add({"follow_route", "Follow Route", "Request an agent to traverse the nearest path.", "s_curve", {"route"},
         {real_param("altitude", altitude_desc, 10.0),
          real_param("distance", "Distance between points. Zero to force simplification.", 0.0),
          {"use_chaining", "Issue one point at a time, for testing only.", ParamDataType::boolean, false}}},
        make<FollowRoute>());
  r.add({"hold_position", "Hold Position", "Move a set of agents to points along the perimeter and hold.", "square",
         {"route", "explore_area", "sector"},
         {real_param("altitude", altitude_desc, 10.0), real_param("duration", "How long to hold.", 60.0),
          int_param("agent_count", "Number of agents to place along perimeter.", 4)}},
        make<HoldPosition>());
  r.add({"examine_object", "Examine Object", "Use UAV to scan an object of interest.", "spiral", {"poi"},
         {real_param("radius", "Radius of sphere around object.", 5.0)}},
        make<ExamineObject>());
  r.add({"safe_land", "Safe Land", "For a given air vehicle, find nearby safe location to land.", "down_arrow", {}, {}},
        make<SafeLand>());
  r.add({"deploy", "Deploy", "Move ground agents to free cells inside the nearest deploy zone.", "chevron",
         {"deploy_zone"}, {int_param("agent_count", "Number of ground agents to deploy.", 10)}},
        make<Deploy>());
  r.add({"scan_building", "Scan Building", "Orbit the nearest building to confirm it.", "triangle", {"building"},
         {real_param("altitude", altitude_desc, 15.0)}},
        make<ScanBuilding>());
  TacticDefinition neg{"negation", "Negation", "Succeeds when its parent fails and fails when it succeeds.", "tilde", {}, {}};
  neg.gate = GateKind::negation;
  r.add(neg, [] { return std::make_unique<Gate>(GateKind::negation); });
  TacticDefinition conj{"conjunction", "Conjunction", "Succeeds when every parent succeeds.", "caret", {}, {}};
  conj.gate = GateKind::conjunction;
  r.add(conj, [] { return std::make_unique<Gate>(GateKind::conjunction); });
  TacticDefinition disj{"disjunction", "Disjunction", "Succeeds when any parent succeeds.", "vee", {}, {}};
  disj.gate = GateKind::disjunction;
  r.add(disj, [] { return std::make_unique<Gate>(GateKind::disjunction); });
  TacticDefinition timer{"timer", "Timer", "Completes a delay after its prerequisites are met.", "hourglass", {},
                         {real_param("delay", "Seconds to wait.", 0.0)}};
  timer.gate = GateKind::timer;
  r.add(timer, make<Timer>());
  return r;
}

}  // namespace swarm::tactics
