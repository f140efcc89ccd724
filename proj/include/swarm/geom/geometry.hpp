#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace swarm::geom {

/// Local Cartesian meters: x east, y north.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
  friend bool operator==(Vec2, Vec2) = default;
};

/// Local Cartesian meters: x east, y north, z up.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec2 xy() const { return {x, y}; }

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend Vec3 operator*(double s, Vec3 a) { return {a.x * s, a.y * s, a.z * s}; }
  friend bool operator==(Vec3, Vec3) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double norm(Vec3 a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline double distance(Vec3 a, Vec3 b) { return norm(a - b); }
inline double ground_distance(Vec3 a, Vec3 b) { return distance(a.xy(), b.xy()); }
inline Vec3 lerp(Vec3 a, Vec3 b, double t) { return a + (b - a) * t; }
inline bool finite(Vec3 a) { return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z); }

using Polygon = std::vector<Vec2>;

/// Signed shoelace area; positive for counter-clockwise rings.
double signed_area(std::span<const Vec2> ring);
inline double area(std::span<const Vec2> ring) { return std::abs(signed_area(ring)); }

/// Area centroid; falls back to the vertex mean for degenerate rings.
Vec2 centroid(std::span<const Vec2> ring);

/// Even-odd rule. Points exactly on an edge may land on either side.
bool point_in_polygon(Vec2 p, std::span<const Vec2> ring);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

/// Distance to the nearest vertex or segment interior of a polyline.
double point_polyline_distance(Vec2 p, std::span<const Vec2> vertices, bool closed);

/// Closed-segment intersection test, including touching and collinear overlap.
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// Intersection point for non-parallel segments, or a point of the shared
/// interval for collinear overlap; nullopt when they do not meet.
std::optional<Vec2> segment_intersection(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

struct Aabb {
  Vec2 min{};
  Vec2 max{};
  bool contains(Vec2 p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
  bool overlaps(const Aabb& o) const {
    return min.x <= o.max.x && o.min.x <= max.x && min.y <= o.max.y && o.min.y <= max.y;
  }
};

Aabb bounds(std::span<const Vec2> pts);

/// Parameter sub-intervals of segment a->b (t in [0,1]) that lie inside the ring.
std::vector<std::pair<double, double>> segment_inside_intervals(Vec2 a, Vec2 b, std::span<const Vec2> ring);

/// Total length of a polyline, including the closing edge when `closed`.
double polyline_length(std::span<const Vec3> vertices, bool closed);
double polyline_length_2d(std::span<const Vec3> vertices, bool closed);

/// Point at arc length `s` measured along the ground-plane projection.
Vec3 point_at_arc_length(std::span<const Vec3> vertices, bool closed, double s);

std::vector<Vec2> to_2d(std::span<const Vec3> pts);

}  // namespace swarm::geom
