#include "swarm/geom/geometry.hpp"

#include <algorithm>
#include <limits>

namespace swarm::geom {

double signed_area(std::span<const Vec2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += cross(ring[i], ring[(i + 1) % n]);
  return 0.5 * acc;
}

Vec2 centroid(std::span<const Vec2> ring) {
  const std::size_t n = ring.size();
  if (n == 0) return {};
  const double a = signed_area(ring);
  if (std::abs(a) < 1e-12) {
    Vec2 sum{};
    for (auto p : ring) sum = sum + p;
    return sum * (1.0 / static_cast<double>(n));
  }
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = ring[i];
    const Vec2 q = ring[(i + 1) % n];
    const double c = cross(p, q);
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  return {cx / (6.0 * a), cy / (6.0 * a)};
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> ring) {
  bool inside = false;
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = ring[i];
    const Vec2 b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + ab * t);
}

double point_polyline_distance(Vec2 p, std::span<const Vec2> vertices, bool closed) {
  const std::size_t n = vertices.size();
  if (n == 0) return std::numeric_limits<double>::infinity();
  if (n == 1) return distance(p, vertices[0]);
  double best = std::numeric_limits<double>::infinity();
  const std::size_t segs = closed ? n : n - 1;
  for (std::size_t i = 0; i < segs; ++i) best = std::min(best, point_segment_distance(p, vertices[i], vertices[(i + 1) % n]));
  return best;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

std::optional<Vec2> segment_intersection(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  if (!segments_intersect(a, b, c, d)) return std::nullopt;
  const Vec2 r = b - a;
  const Vec2 s = d - c;
  const double denom = cross(r, s);
  if (denom != 0.0) {
    const double t = std::clamp(cross(c - a, s) / denom, 0.0, 1.0);
    return a + r * t;
  }
  // Collinear: return the first endpoint lying on the other segment.
  if (on_segment(c, d, a)) return a;
  if (on_segment(c, d, b)) return b;
  if (on_segment(a, b, c)) return c;
  return d;
}

Aabb bounds(std::span<const Vec2> pts) {
  Aabb box{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
           {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (auto p : pts) {
    box.min.x = std::min(box.min.x, p.x);
    box.min.y = std::min(box.min.y, p.y);
    box.max.x = std::max(box.max.x, p.x);
    box.max.y = std::max(box.max.y, p.y);
  }
  return box;
}

std::vector<std::pair<double, double>> segment_inside_intervals(Vec2 a, Vec2 b, std::span<const Vec2> ring) {
  std::vector<std::pair<double, double>> out;
  const std::size_t n = ring.size();
  if (n < 3) return out;
  std::vector<double> cuts{0.0, 1.0};
  const Vec2 r = b - a;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 c = ring[i];
    const Vec2 s = ring[(i + 1) % n] - c;
    const double denom = cross(r, s);
    if (denom == 0.0) continue;
    const double t = cross(c - a, s) / denom;
    const double u = cross(c - a, r) / denom;
    if (t > 0.0 && t < 1.0 && u >= 0.0 && u <= 1.0) cuts.push_back(t);
  }
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double t0 = cuts[i];
    const double t1 = cuts[i + 1];
    if (t1 - t0 <= 0.0) continue;
    if (!point_in_polygon(a + r * (0.5 * (t0 + t1)), ring)) continue;
    if (!out.empty() && out.back().second == t0) {
      out.back().second = t1;
    } else {
      out.emplace_back(t0, t1);
    }
  }
  return out;
}

double polyline_length(std::span<const Vec3> vertices, bool closed) {
  const std::size_t n = vertices.size();
  if (n < 2) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) total += distance(vertices[i], vertices[i + 1]);
  if (closed) total += distance(vertices[n - 1], vertices[0]);
  return total;
}

double polyline_length_2d(std::span<const Vec3> vertices, bool closed) {
  const std::size_t n = vertices.size();
  if (n < 2) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) total += ground_distance(vertices[i], vertices[i + 1]);
  if (closed) total += ground_distance(vertices[n - 1], vertices[0]);
  return total;
}

Vec3 point_at_arc_length(std::span<const Vec3> vertices, bool closed, double s) {
  const std::size_t n = vertices.size();
  if (n == 0) return {};
  if (n == 1 || s <= 0.0) return vertices[0];
  const std::size_t segs = closed ? n : n - 1;
  double walked = 0.0;
  for (std::size_t i = 0; i < segs; ++i) {
    const Vec3 a = vertices[i];
    const Vec3 b = vertices[(i + 1) % n];
    const double len = ground_distance(a, b);
    if (len > 0.0 && walked + len >= s) return lerp(a, b, (s - walked) / len);
    walked += len;
  }
  return closed ? vertices[0] : vertices[n - 1];
}

std::vector<Vec2> to_2d(std::span<const Vec3> pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(p.xy());
  return out;
}

}  // namespace swarm::geom
