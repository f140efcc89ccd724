#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "swarm/geom/geometry.hpp"

namespace swarm::geom {

using SketchId = std::uint64_t;
using AgentKey = std::uint32_t;
using SelectionGroup = std::set<AgentKey>;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SketchKind : std::uint8_t { point, polyline };

struct SketchPoint {
  SketchId id = 0;
  std::string type_name;
  Vec3 position{};
  bool ground_lock = false;  // z pinned to 0
};

struct SketchPolyline {
  SketchId id = 0;
  std::string type_name;
  std::vector<Vec3> vertices;
  bool closed = false;
};

using Sketch = std::variant<SketchPoint, SketchPolyline>;

SketchId sketch_id(const Sketch& s);
const std::string& sketch_type(const Sketch& s);
/// 2D distance from `p` to the sketch's vertices and segment interiors;
/// 0 anywhere inside a closed one.
double sketch_distance(const Sketch& s, Vec2 p);

/// Custom parameter type: underlying kind plus how C2 offers and draws it.
struct ParamType {
  std::string type_name;
  SketchKind kind = SketchKind::point;
  std::uint32_t type_id = 0;
  std::string command;  // gesture or palette command
  bool closed = false;  // polylines auto-close
  bool no_go = false;   // rasterized as an obstacle
  std::string color;
  double line_width = 1.0;
};

class ParamTypeRegistry {
 public:
  /// Throws GeometryError on a duplicate name or type id.
  void register_type(ParamType type);
  const ParamType* find(std::string_view type_name) const;
  const std::map<std::string, ParamType, std::less<>>& types() const { return types_; }

  /// poi, recovery_point, breach_point, route, explore_area, deploy_zone,
  /// sector, no_go_zone and the curb/wall/powerline obstacle lines.
  static ParamTypeRegistry with_builtins();

 private:
  std::map<std::string, ParamType, std::less<>> types_;
};

/// New group = old XOR members inside the stroke (even-odd). Strokes with
/// fewer than 3 vertices leave the group unchanged.
SelectionGroup lasso_update(const SelectionGroup& group, std::span<const Vec2> stroke,
                            const std::map<AgentKey, Vec2>& agents);

/// min_distance > 0: resample at 0, d, 2d, ... of ground-plane arc length,
/// always ending on the last vertex. min_distance == 0: Douglas-Peucker with
/// a 0.5 m tolerance.
std::vector<Vec3> simplify(std::span<const Vec3> vertices, double min_distance, bool closed = false);

inline constexpr double kSimplifyTolerance = 0.5;
inline constexpr double kMinLoopArea = 1.0;

/// Douglas-Peucker in the ground plane; keeps both endpoints.
std::vector<Vec3> douglas_peucker(std::span<const Vec3> vertices, double tolerance);

/// Splits a closed ring at its crossings and keeps the largest simple loop.
/// Throws GeometryError when the result encloses less than 1 m².
std::vector<Vec3> remove_self_intersections(std::span<const Vec3> ring);

/// True when no two non-adjacent edges of the closed ring meet.
bool is_simple(std::span<const Vec2> ring);

/// Operator sketch database shared by C2 and the tactics engine.
class SketchDatabase {
 public:
  explicit SketchDatabase(ParamTypeRegistry registry = ParamTypeRegistry::with_builtins());

  /// Closed types are normalised (self-intersections removed).
  /// Throws GeometryError for unknown types or degenerate geometry.
  SketchId create(std::string_view type_name, std::vector<Vec3> vertices);
  /// Same as create but with a caller-chosen id (replay, network mirrors).
  void put(SketchId id, std::string_view type_name, std::vector<Vec3> vertices);
  void modify(SketchId id, std::vector<Vec3> vertices);
  bool remove(SketchId id);

  const Sketch* find(SketchId id) const;
  const std::map<SketchId, Sketch>& all() const { return sketches_; }
  std::vector<const Sketch*> of_type(std::string_view type_name) const;
  std::size_t size() const { return sketches_.size(); }
  bool empty() const { return sketches_.empty(); }
  const ParamTypeRegistry& registry() const { return registry_; }

  /// Closest sketch among the accepted types; ties go to the lower id.
  std::optional<SketchId> closest(Vec2 position, std::span<const std::string> accepted) const;

 private:
  Sketch build(SketchId id, std::string_view type_name, std::vector<Vec3> vertices) const;

  ParamTypeRegistry registry_;
  std::map<SketchId, Sketch> sketches_;
  SketchId next_id_ = 1;
};

}  // namespace swarm::geom
