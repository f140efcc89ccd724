#include <algorithm>
#include <random>

#include "doctest.h"
#include "swarm/geom/sketch.hpp"

using namespace swarm::geom;

namespace {

// Independent orientation-based crossing test used as the simplicity oracle.
double orient(Vec2 a, Vec2 b, Vec2 c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

bool oracle_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double d1 = orient(c, d, a), d2 = orient(c, d, b), d3 = orient(a, b, c), d4 = orient(a, b, d);
  auto within = [](Vec2 p, Vec2 q, Vec2 r) {
    return std::min(p.x, q.x) - 1e-12 <= r.x && r.x <= std::max(p.x, q.x) + 1e-12 &&
           std::min(p.y, q.y) - 1e-12 <= r.y && r.y <= std::max(p.y, q.y) + 1e-12;
  };
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && within(c, d, a)) return true;
  if (d2 == 0 && within(c, d, b)) return true;
  if (d3 == 0 && within(a, b, c)) return true;
  if (d4 == 0 && within(a, b, d)) return true;
  return false;
}

bool oracle_simple(const std::vector<Vec3>& ring) {
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || (i + 1) % n == j || (j + 1) % n == i) continue;
      if (oracle_cross(ring[i].xy(), ring[(i + 1) % n].xy(), ring[j].xy(), ring[(j + 1) % n].xy())) return false;
    }
  return true;
}

double shoelace(const std::vector<Vec3>& r) {
  double s = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto& a = r[i];
    const auto& b = r[(i + 1) % r.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return std::abs(s) / 2;
}

double seg_dist(Vec2 p, Vec2 a, Vec2 b) {
  // Dense sampling oracle is too coarse; project explicitly.
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double l2 = vx * vx + vy * vy;
  double t = l2 == 0 ? 0 : ((p.x - a.x) * vx + (p.y - a.y) * vy) / l2;
  t = std::max(0.0, std::min(1.0, t));
  return std::hypot(p.x - a.x - t * vx, p.y - a.y - t * vy);
}

}  // namespace

TEST_CASE("lasso uses symmetric difference") {
  const std::map<AgentKey, Vec2> agents{{1, {0, 0}}, {2, {10, 0}}, {3, {20, 0}}};
  const std::vector<Vec2> around_ab{{-5, -5}, {15, -5}, {15, 5}, {-5, 5}};
  const std::vector<Vec2> around_bc{{5, -5}, {25, -5}, {25, 5}, {5, 5}};
  const std::vector<Vec2> around_a{{-5, -5}, {5, -5}, {5, 5}, {-5, 5}};
  auto g = lasso_update({}, around_ab, agents);
  CHECK(g == SelectionGroup{1, 2});
  g = lasso_update(g, around_bc, agents);
  CHECK(g == SelectionGroup{1, 3});
  CHECK(lasso_update(lasso_update({}, around_a, agents), around_a, agents).empty());
  CHECK(lasso_update({2}, std::vector<Vec2>{{0, 0}, {1, 1}}, agents) == SelectionGroup{2});
}

TEST_CASE("lasso updates commute over disjoint strokes") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 100);
  std::map<AgentKey, Vec2> agents;
  for (AgentKey i = 0; i < 60; ++i) agents[i] = {u(rng), u(rng)};
  const std::vector<Vec2> left{{0, 0}, {45, 0}, {45, 100}, {0, 100}};
  const std::vector<Vec2> right{{55, 0}, {100, 0}, {100, 100}, {55, 100}};
  SelectionGroup start{1, 2, 3, 50};
  CHECK(lasso_update(lasso_update(start, left, agents), right, agents) ==
        lasso_update(lasso_update(start, right, agents), left, agents));
}

TEST_CASE("simplify resamples by arc length") {
  const std::vector<Vec3> seg{{0, 0, 0}, {10, 0, 0}};
  const auto out = simplify(seg, 3.0);
  REQUIRE(out.size() == 5);
  const double expected[] = {0, 3, 6, 9, 10};
  for (int i = 0; i < 5; ++i) CHECK(out[i].x == doctest::Approx(expected[i]));

  // Oracle: walk an L-shaped path, sample positions by hand.
  const std::vector<Vec3> ell{{0, 0, 0}, {4, 0, 0}, {4, 4, 0}};
  const auto l = simplify(ell, 3.0);
  REQUIRE(l.size() == 4);
  CHECK(l[1].x == doctest::Approx(3));
  CHECK(l[2].x == doctest::Approx(4));
  CHECK(l[2].y == doctest::Approx(2));
  CHECK(l[3].y == doctest::Approx(4));
  CHECK(simplify(std::vector<Vec3>{{0, 0, 0}, {9, 0, 0}}, 3.0).size() == 4);
  CHECK(simplify(std::vector<Vec3>{{1, 2, 3}}, 3.0) == std::vector<Vec3>{{1, 2, 3}});
  CHECK_THROWS_AS(simplify(seg, -1), GeometryError);
}

TEST_CASE("douglas-peucker collapses collinear vertices") {
  std::vector<Vec3> line;
  for (int i = 0; i < 100; ++i) line.push_back({static_cast<double>(i), 0.5 * i, 0});
  const auto out = simplify(line, 0.0);
  REQUIRE(out.size() == 2);
  CHECK(out.front() == line.front());
  CHECK(out.back() == line.back());
  CHECK(simplify(std::vector<Vec3>{{1, 2, 3}}, 0.0).size() == 1);
}

TEST_CASE("douglas-peucker never grows and keeps endpoints") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Vec3> path;
    Vec3 p{};
    for (int i = 0; i < 2 + trial % 50; ++i) {
      p = p + Vec3{n(rng), n(rng), 0};
      path.push_back(p);
    }
    const auto out = simplify(path, 0.0);
    CHECK(out.size() <= path.size());
    CHECK(out.front() == path.front());
    CHECK(out.back() == path.back());
    // Every dropped vertex lies within tolerance of the simplified polyline.
    for (const auto& v : path) {
      double best = 1e18;
      for (std::size_t i = 0; i + 1 < out.size(); ++i) best = std::min(best, seg_dist(v.xy(), out[i].xy(), out[i + 1].xy()));
      if (out.size() == 1) best = 0;
      CHECK(best <= kSimplifyTolerance + 1e-9);
    }
  }
}

TEST_CASE("figure eight keeps the larger lobe") {
  // Lobes: left square 10x10, right square 20x20, crossing at (10, 5).
  const std::vector<Vec3> eight{{0, 0, 0}, {10, 10, 0}, {30, 15, 0}, {30, -5, 0}, {10, 0, 0}, {0, 10, 0}};
  REQUIRE_FALSE(oracle_simple(eight));
  const auto out = remove_self_intersections(eight);
  CHECK(oracle_simple(out));
  CHECK(out.size() >= 3);
  CHECK(std::any_of(out.begin(), out.end(), [](const Vec3& v) { return v.x == 30; }));
  CHECK_FALSE(std::any_of(out.begin(), out.end(), [](const Vec3& v) { return v.x == 0; }));
}

TEST_CASE("simple rings are unchanged; degenerate ones rejected") {
  const std::vector<Vec3> square{{0, 0, 0}, {10, 0, 0}, {10, 10, 0}, {0, 10, 0}};
  CHECK(remove_self_intersections(square) == square);
  const std::vector<Vec3> back{{0, 0, 0}, {10, 0, 0}, {20, 0, 0}, {10, 0, 0}};
  CHECK_THROWS_AS(remove_self_intersections(back), GeometryError);
  const std::vector<Vec3> tiny{{0, 0, 0}, {0.5, 0, 0}, {0.5, 0.5, 0}};
  CHECK_THROWS_AS(remove_self_intersections(tiny), GeometryError);
}

TEST_CASE("random scribbles normalise to simple loops") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 50);
  int accepted = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Vec3> ring(3 + trial % 12);
    for (auto& v : ring) v = {u(rng), u(rng), 0};
    try {
      const auto out = remove_self_intersections(ring);
      ++accepted;
      CHECK(oracle_simple(out));
      CHECK(shoelace(out) >= kMinLoopArea);
      CHECK(shoelace(out) <= 2500.0 + 1e-6);
    } catch (const GeometryError&) {
    }
  }
  CHECK(accepted > 250);
}

TEST_CASE("database types and normalisation") {
  SketchDatabase db;
  const auto a = db.create("explore_area", {{0, 0, 0}, {10, 10, 0}, {30, 15, 0}, {30, -5, 0}, {10, 0, 0}, {0, 10, 0}});
  const auto* s = db.find(a);
  REQUIRE(s);
  CHECK(oracle_simple(std::get<SketchPolyline>(*s).vertices));
  CHECK_THROWS_AS(db.create("nonsense", {{0, 0, 0}}), GeometryError);
  CHECK_THROWS_AS(db.create("poi", {{0, 0, 0}, {1, 1, 1}}), GeometryError);
  CHECK_THROWS_AS(db.create("explore_area", {{0, 0, 0}, {1, 1, 1}}), GeometryError);
  const auto r = db.create("recovery_point", {{5, 5, 9}});
  CHECK(std::get<SketchPoint>(*db.find(r)).position.z == 0.0);
  db.modify(r, {{6, 6, 0}});
  CHECK(std::get<SketchPoint>(*db.find(r)).position.x == 6.0);
  CHECK(db.remove(r));
  CHECK_FALSE(db.remove(r));
  CHECK(db.of_type("explore_area").size() == 1);
}

TEST_CASE("closest sketch") {
  SketchDatabase db;
  const auto area = db.create("explore_area", {{0, 0, 0}, {10, 0, 0}, {10, 10, 0}, {0, 10, 0}});
  const auto sector = db.create("sector", {{60, 0, 0}, {70, 0, 0}, {70, 10, 0}, {60, 10, 0}});
  const std::vector<std::string> both{"explore_area", "sector"};
  CHECK(db.closest({11, 5}, both) == area);
  CHECK(db.closest({59, 5}, both) == sector);
  const std::vector<std::string> routes{"route"};
  CHECK_FALSE(db.closest({0, 0}, routes));
  // Equidistant: x = 35 is 25 m from both.
  CHECK(db.closest({35, 5}, both) == area);
}

TEST_CASE("a point inside a closed area picks that area") {
  SketchDatabase db;
  const auto west = db.create("explore_area", {{0, 0, 0}, {50, 0, 0}, {50, 100, 0}, {0, 100, 0}});
  const auto east = db.create("explore_area", {{50, 0, 0}, {100, 0, 0}, {100, 100, 0}, {50, 100, 0}});
  const std::vector<std::string> areas{"explore_area"};
  // The centre of the east area is 25 m from the shared edge.
  CHECK(db.closest({75, 50}, areas) == east);
  CHECK(db.closest({25, 50}, areas) == west);
  CHECK(sketch_distance(*db.find(east), {75, 50}) == 0.0);
  CHECK(sketch_distance(*db.find(west), {75, 50}) == doctest::Approx(25.0));
}

TEST_CASE("closest sketch agrees with an exhaustive scan") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 200);
  const std::vector<std::string> types{"route", "poi", "sector"};
  for (int trial = 0; trial < 50; ++trial) {
    SketchDatabase db;
    for (int i = 0; i < 15; ++i) {
      if (i % 3 == 0) {
        db.create("poi", {{u(rng), u(rng), 0}});
      } else {
        std::vector<Vec3> pts(2 + i % 4);
        for (auto& p : pts) p = {u(rng), u(rng), 0};
        db.create("route", pts);
      }
    }
    for (int q = 0; q < 20; ++q) {
      const Vec2 p{u(rng), u(rng)};
      std::optional<SketchId> best;
      double bd = 1e18;
      for (const auto& [id, sk] : db.all()) {
        double d = 1e18;
        if (const auto* pt = std::get_if<SketchPoint>(&sk)) {
          d = std::hypot(p.x - pt->position.x, p.y - pt->position.y);
        } else {
          const auto& v = std::get<SketchPolyline>(sk).vertices;
          for (std::size_t i = 0; i + 1 < v.size(); ++i) d = std::min(d, seg_dist(p, v[i].xy(), v[i + 1].xy()));
        }
        if (d < bd) {
          bd = d;
          best = id;
        }
      }
      CHECK(db.closest(p, types) == best);
    }
  }
}
