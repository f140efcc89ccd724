#include "swarm/geom/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace swarm::geom {

SketchId sketch_id(const Sketch& s) {
  return std::visit([](const auto& x) { return x.id; }, s);
}

const std::string& sketch_type(const Sketch& s) {
  return std::visit([](const auto& x) -> const std::string& { return x.type_name; }, s);
}

double sketch_distance(const Sketch& s, Vec2 p) {
  if (const auto* pt = std::get_if<SketchPoint>(&s)) return distance(p, pt->position.xy());
  const auto& line = std::get<SketchPolyline>(s);
  const auto flat = to_2d(line.vertices);
  // Inside an area counts as on it, so a click in the middle of one area is
  // not pulled to a neighbour sharing an edge.
  if (line.closed && flat.size() >= 3 && point_in_polygon(p, flat)) return 0.0;
  return point_polyline_distance(p, flat, line.closed);
}

// ---------------------------------------------------------------------------

void ParamTypeRegistry::register_type(ParamType type) {
  if (types_.contains(type.type_name)) throw GeometryError("duplicate sketch type: " + type.type_name);
  for (const auto& [name, t] : types_)
    if (t.type_id == type.type_id) throw GeometryError("duplicate sketch type id for " + type.type_name);
  std::string key = type.type_name;
  types_.emplace(std::move(key), std::move(type));
}

const ParamType* ParamTypeRegistry::find(std::string_view type_name) const {
  auto it = types_.find(type_name);
  return it == types_.end() ? nullptr : &it->second;
}

ParamTypeRegistry ParamTypeRegistry::with_builtins() {
  ParamTypeRegistry r;
  const auto P = SketchKind::point;
  const auto L = SketchKind::polyline;
  r.register_type({"poi", P, 1, "point_of_interest", false, false, "#ffd400", 1.0});
  r.register_type({"recovery_point", P, 2, "recovery_point", false, false, "#00c8ff", 1.0});
  r.register_type({"breach_point", P, 3, "breach_point", false, false, "#ff7a00", 1.0});
  r.register_type({"route", L, 10, "route", false, false, "#ffffff", 2.0});
  r.register_type({"explore_area", L, 11, "explore_area", true, false, "#39ff14", 2.0});
  r.register_type({"deploy_zone", L, 12, "deploy_zone", true, false, "#ffff00", 2.0});
  r.register_type({"sector", L, 13, "sector", true, false, "#b266ff", 2.0});
  r.register_type({"no_go_zone", L, 14, "no_go_zone", true, true, "#ff0000", 2.0});
  r.register_type({"curb", L, 20, "curb", false, true, "#ff0000", 1.0});
  r.register_type({"wall", L, 21, "wall", false, true, "#00ff00", 1.0});
  r.register_type({"powerline", L, 22, "powerline", false, true, "#a020f0", 1.0});
  return r;
}

// ---------------------------------------------------------------------------

SelectionGroup lasso_update(const SelectionGroup& group, std::span<const Vec2> stroke,
                            const std::map<AgentKey, Vec2>& agents) {
  if (stroke.size() < 3) return group;
  SelectionGroup out = group;
  for (const auto& [id, pos] : agents) {
    if (!point_in_polygon(pos, stroke)) continue;
    if (!out.erase(id)) out.insert(id);
  }
  return out;
}

namespace {

void dp_recurse(std::span<const Vec3> v, std::size_t lo, std::size_t hi, double tol, std::vector<char>& keep) {
  if (hi <= lo + 1) return;
  double worst = -1.0;
  std::size_t idx = lo;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    const double d = point_segment_distance(v[i].xy(), v[lo].xy(), v[hi].xy());
    if (d > worst) {
      worst = d;
      idx = i;
    }
  }
  if (worst > tol) {
    keep[idx] = 1;
    dp_recurse(v, lo, idx, tol, keep);
    dp_recurse(v, idx, hi, tol, keep);
  }
}

}  // namespace

std::vector<Vec3> douglas_peucker(std::span<const Vec3> vertices, double tolerance) {
  const std::size_t n = vertices.size();
  if (n <= 2) return {vertices.begin(), vertices.end()};
  std::vector<char> keep(n, 0);
  keep.front() = 1;
  keep.back() = 1;
  dp_recurse(vertices, 0, n - 1, tolerance, keep);
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i] != 0) out.push_back(vertices[i]);
  return out;
}

std::vector<Vec3> simplify(std::span<const Vec3> vertices, double min_distance, bool closed) {
  if (min_distance < 0.0) throw GeometryError("min_distance must be nonnegative");
  if (vertices.size() <= 1) return {vertices.begin(), vertices.end()};

  std::vector<Vec3> path(vertices.begin(), vertices.end());
  if (closed) path.push_back(vertices.front());

  if (min_distance == 0.0) {
    auto out = douglas_peucker(path, kSimplifyTolerance);
    if (closed && out.size() > 1) out.pop_back();
    return out;
  }

  const double total = polyline_length_2d(path, false);
  std::vector<Vec3> out;
  const auto steps = static_cast<std::size_t>(std::floor(total / min_distance + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double s = static_cast<double>(k) * min_distance;
    if (s > total - 1e-9 && k > 0) break;
    out.push_back(point_at_arc_length(path, false, s));
  }
  if (closed) return out;
  out.push_back(path.back());
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool adjacent(std::size_t i, std::size_t j, std::size_t n) { return j == i + 1 || (i == 0 && j == n - 1); }

std::vector<Vec2> dedupe(std::vector<Vec2> ring) {
  std::vector<Vec2> out;
  for (auto p : ring)
    if (out.empty() || distance(out.back(), p) > 1e-9) out.push_back(p);
  while (out.size() > 1 && distance(out.front(), out.back()) <= 1e-9) out.pop_back();
  return out;
}

void split_loops(std::vector<Vec2> ring, std::vector<std::vector<Vec2>>& out, int depth) {
  ring = dedupe(std::move(ring));
  const std::size_t n = ring.size();
  if (n < 3) return;
  if (depth > 512) {
    out.push_back(std::move(ring));
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (adjacent(i, j, n)) continue;
      const Vec2 a = ring[i], b = ring[(i + 1) % n], c = ring[j], d = ring[(j + 1) % n];
      auto hit = segment_intersection(a, b, c, d);
      if (!hit) continue;
      std::vector<Vec2> first{*hit};
      for (std::size_t k = i + 1; k <= j; ++k) first.push_back(ring[k]);
      std::vector<Vec2> second;
      for (std::size_t k = 0; k <= i; ++k) second.push_back(ring[k]);
      second.push_back(*hit);
      for (std::size_t k = j + 1; k < n; ++k) second.push_back(ring[k]);
      split_loops(std::move(first), out, depth + 1);
      split_loops(std::move(second), out, depth + 1);
      return;
    }
  }
  out.push_back(std::move(ring));
}

}  // namespace

bool is_simple(std::span<const Vec2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j) {
      if (adjacent(i, j, n)) continue;
      if (segments_intersect(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n])) return false;
    }
  return true;
}

std::vector<Vec3> remove_self_intersections(std::span<const Vec3> ring) {
  if (ring.size() < 3) throw GeometryError("closed polyline needs at least 3 vertices");
  const double z = ring.front().z;
  std::vector<std::vector<Vec2>> loops;
  split_loops(to_2d(ring), loops, 0);
  const std::vector<Vec2>* best = nullptr;
  double best_area = 0.0;
  for (const auto& loop : loops) {
    const double a = area(loop);
    if (a > best_area) {
      best_area = a;
      best = &loop;
    }
  }
  if (best == nullptr || best_area < kMinLoopArea) throw GeometryError("closed polyline encloses less than 1 m^2");

  // Keep original vertices where they survived so heights are preserved.
  std::vector<Vec3> out;
  out.reserve(best->size());
  for (auto p : *best) {
    Vec3 v{p.x, p.y, z};
    for (const auto& orig : ring)
      if (orig.x == p.x && orig.y == p.y) {
        v = orig;
        break;
      }
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------

SketchDatabase::SketchDatabase(ParamTypeRegistry registry) : registry_(std::move(registry)) {}

Sketch SketchDatabase::build(SketchId id, std::string_view type_name, std::vector<Vec3> vertices) const {
  const auto* type = registry_.find(type_name);
  if (type == nullptr) throw GeometryError("unknown sketch type: " + std::string(type_name));
  for (const auto& v : vertices)
    if (!finite(v)) throw GeometryError("sketch vertex is not finite");
  if (type->kind == SketchKind::point) {
    if (vertices.size() != 1) throw GeometryError(std::string(type_name) + " takes exactly one position");
    SketchPoint p{id, type->type_name, vertices[0], type_name == "recovery_point"};
    if (p.ground_lock) p.position.z = 0.0;
    return p;
  }
  if (type->closed) {
    if (vertices.size() < 3) throw GeometryError(std::string(type_name) + " needs at least 3 vertices");
    vertices = remove_self_intersections(vertices);
  } else if (vertices.size() < 2) {
    throw GeometryError(std::string(type_name) + " needs at least 2 vertices");
  }
  return SketchPolyline{id, type->type_name, std::move(vertices), type->closed};
}

SketchId SketchDatabase::create(std::string_view type_name, std::vector<Vec3> vertices) {
  const SketchId id = next_id_;
  sketches_.emplace(id, build(id, type_name, std::move(vertices)));
  ++next_id_;
  return id;
}

void SketchDatabase::put(SketchId id, std::string_view type_name, std::vector<Vec3> vertices) {
  sketches_.insert_or_assign(id, build(id, type_name, std::move(vertices)));
  next_id_ = std::max(next_id_, id + 1);
}

void SketchDatabase::modify(SketchId id, std::vector<Vec3> vertices) {
  auto it = sketches_.find(id);
  if (it == sketches_.end()) throw GeometryError("unknown sketch " + std::to_string(id));
  it->second = build(id, sketch_type(it->second), std::move(vertices));
}

bool SketchDatabase::remove(SketchId id) { return sketches_.erase(id) != 0; }

const Sketch* SketchDatabase::find(SketchId id) const {
  auto it = sketches_.find(id);
  return it == sketches_.end() ? nullptr : &it->second;
}

std::vector<const Sketch*> SketchDatabase::of_type(std::string_view type_name) const {
  std::vector<const Sketch*> out;
  for (const auto& [id, s] : sketches_)
    if (sketch_type(s) == type_name) out.push_back(&s);
  return out;
}

std::optional<SketchId> SketchDatabase::closest(Vec2 position, std::span<const std::string> accepted) const {
  std::optional<SketchId> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [id, s] : sketches_) {
    if (std::find(accepted.begin(), accepted.end(), sketch_type(s)) == accepted.end()) continue;
    const double d = sketch_distance(s, position);
    if (d < best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

}  // namespace swarm::geom
