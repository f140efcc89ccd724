#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "swarm/tactics/engine.hpp"
#include "swarm/tactics/library.hpp"

using namespace swarm;
using namespace swarm::tactics;
using geom::Vec2;
using geom::Vec3;

namespace {

constexpr TacticState kStates[] = {TacticState::pending, TacticState::in_progress, TacticState::failed,
                                   TacticState::completed};

// Truth tables written from the gate rules directly.
Readiness oracle_gate(GateKind g, const std::vector<TacticState>& ps) {
  auto is = [](TacticState want) { return [want](TacticState s) { return s == want; }; };
  const bool all_ok = std::all_of(ps.begin(), ps.end(), is(TacticState::completed));
  const bool any_ok = std::any_of(ps.begin(), ps.end(), is(TacticState::completed));
  const bool all_bad = std::all_of(ps.begin(), ps.end(), is(TacticState::failed));
  const bool any_bad = std::any_of(ps.begin(), ps.end(), is(TacticState::failed));
  switch (g) {
    case GateKind::negation:
      if (ps.size() != 1) return Readiness::fail;
      return any_bad ? Readiness::complete : any_ok ? Readiness::fail : Readiness::wait;
    case GateKind::conjunction:
      return any_bad ? Readiness::fail : all_ok ? Readiness::complete : Readiness::wait;
    case GateKind::disjunction:
      return any_ok ? Readiness::complete : all_bad ? Readiness::fail : Readiness::wait;
    default:
      return any_bad ? Readiness::fail : all_ok ? Readiness::start : Readiness::wait;
  }
}

void for_each_combo(std::size_t n, const std::function<void(const std::vector<TacticState>&)>& f) {
  std::vector<TacticState> ps(n);
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 4;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i, c /= 4) ps[i] = kStates[c % 4];
    f(ps);
  }
}

// Queues one job per start; the job outcome drives the instance.
class Probe : public Tactic {
 public:
  void start(TacticContext& ctx) override {
    TaskSpec t;
    t.waypoints = {ctx.instance.position};
    const auto n = ctx.instance.integer("jobs");
    for (std::int64_t i = 0; i < n; ++i) ctx.queue(t);
  }
};

TacticRegistry test_registry() {
  TacticRegistry r = builtin_tactics();
  r.add({"probe", "Probe", "test", "dot", {}, {{"jobs", "", ParamDataType::integer, wire::Value(1LL)}}},
        [] { return std::make_unique<Probe>(); });
  return r;
}

struct Fixture {
  geom::SketchDatabase db;
  msg::AgentTable agents;
  std::vector<geom::Building> buildings;
  std::vector<Vec2> occupied;
  std::vector<geom::BuildingId> confirmed;
  TacticsEngine engine{test_registry()};

  TacticWorld world() {
    TacticWorld w;
    w.sketches = &db;
    w.buildings = buildings;
    w.agents = &agents;
    w.occupied = occupied;
    w.confirm_building = [this](geom::BuildingId b) { confirmed.push_back(b); };
    return w;
  }

  InstanceId invoke(const std::string& def, Vec3 pos = {}, msg::ParamList params = {}, bool deferred = false) {
    Invocation inv;
    inv.definition = def;
    inv.position = pos;
    inv.params = std::move(params);
    inv.deferred = deferred;
    return engine.invoke(inv, world(), 0.0);
  }

  TacticsEngine::Output tick(double now = 0.0) { return engine.tick(world(), now); }

  void job_event(alloc::JobEventKind k, JobId job, AgentId agent = 1, double now = 0.0) {
    engine.on_job_event({k, job, 0, agent, now}, world(), now);
  }

  TacticState state(InstanceId id) { return engine.find(id)->state; }
};

std::vector<Vec3> square(double x0, double y0, double side) {
  return {{x0, y0, 0}, {x0 + side, y0, 0}, {x0 + side, y0 + side, 0}, {x0, y0 + side, 0}};
}

}  // namespace

TEST_CASE("gate readiness truth tables over one to three parents") {
  int cases = 0;
  for (auto g : {GateKind::none, GateKind::negation, GateKind::conjunction, GateKind::disjunction}) {
    for (std::size_t n = 1; n <= 3; ++n)
      for_each_combo(n, [&](const std::vector<TacticState>& ps) {
        CHECK(gate_readiness(g, ps) == oracle_gate(g, ps));
        ++cases;
      });
  }
  CHECK(cases == 4 * (4 + 16 + 64));
  CHECK(gate_readiness(GateKind::negation, std::vector<TacticState>{}) == Readiness::fail);
}

TEST_CASE("gates settle in the engine from parent job outcomes") {
  for (auto g : {"negation", "conjunction", "disjunction"})
    for (std::size_t n = 1; n <= 3; ++n) {
      if (std::string(g) == "negation" && n != 1) continue;
      for (int mask = 0; mask < (1 << n); ++mask) {
        Fixture f;
        std::vector<InstanceId> parents;
        for (std::size_t i = 0; i < n; ++i) parents.push_back(f.invoke("probe"));
        const InstanceId gate = f.invoke(g, {}, {}, true);
        for (auto p : parents) f.engine.link(p, gate);
        f.engine.issue(gate);
        auto out = f.tick();
        REQUIRE(out.jobs.size() == n);
        std::vector<TacticState> expect_parents;
        for (std::size_t i = 0; i < n; ++i) {
          const bool ok = (mask >> i) & 1;
          f.job_event(ok ? alloc::JobEventKind::succeeded : alloc::JobEventKind::failed, out.jobs[i].job_id);
          expect_parents.push_back(ok ? TacticState::completed : TacticState::failed);
        }
        f.tick(1.0);
        const auto r = oracle_gate(std::string(g) == "negation" ? GateKind::negation
                                   : std::string(g) == "conjunction" ? GateKind::conjunction
                                                                     : GateKind::disjunction,
                                   expect_parents);
        CHECK(f.state(gate) == (r == Readiness::complete ? TacticState::completed : TacticState::failed));
      }
    }
}

TEST_CASE("a gate waits while its parents run") {
  Fixture f;
  const auto a = f.invoke("probe");
  const auto b = f.invoke("probe");
  const auto g = f.invoke("disjunction", {}, {}, true);
  f.engine.link(a, g);
  f.engine.link(b, g);
  f.engine.issue(g);
  auto out = f.tick();
  CHECK(f.state(g) == TacticState::pending);
  f.job_event(alloc::JobEventKind::failed, out.jobs[0].job_id);
  f.tick();
  CHECK(f.state(g) == TacticState::pending);
  f.job_event(alloc::JobEventKind::succeeded, out.jobs[1].job_id);
  f.tick();
  CHECK(f.state(g) == TacticState::completed);
}

TEST_CASE("chained tactic starts only after its parent completes") {
  Fixture f;
  const auto a = f.invoke("probe");
  const auto b = f.invoke("probe", {}, {}, true);
  f.engine.link(a, b);
  f.engine.issue(b);
  auto out = f.tick();
  CHECK(out.jobs.size() == 1);
  CHECK(f.state(b) == TacticState::pending);
  f.job_event(alloc::JobEventKind::succeeded, out.jobs[0].job_id);
  out = f.tick(1.0);
  CHECK(f.state(a) == TacticState::completed);
  CHECK(f.state(b) == TacticState::in_progress);
  REQUIRE(out.jobs.size() == 1);
  CHECK(out.jobs[0].tactic_id == b);
}

TEST_CASE("failed parent fails the chained child") {
  Fixture f;
  const auto a = f.invoke("probe");
  const auto b = f.invoke("probe", {}, {}, true);
  f.engine.link(a, b);
  f.engine.issue(b);
  auto out = f.tick();
  f.job_event(alloc::JobEventKind::failed, out.jobs[0].job_id);
  out = f.tick();
  CHECK(f.state(b) == TacticState::failed);
  CHECK(out.jobs.empty());
}

TEST_CASE("timer completes after its delay") {
  Fixture f;
  const auto t = f.invoke("timer", {}, {{"delay", 5.0}});
  f.tick(0.0);
  CHECK(f.state(t) == TacticState::in_progress);
  f.tick(4.9);
  CHECK(f.state(t) == TacticState::in_progress);
  f.tick(5.0);
  CHECK(f.state(t) == TacticState::completed);
}

TEST_CASE("cycle and invalid links are rejected without changing the graph") {
  Fixture f;
  const auto a = f.invoke("probe", {}, {}, true);
  const auto b = f.invoke("probe", {}, {}, true);
  const auto c = f.invoke("probe", {}, {}, true);
  f.engine.link(a, b);
  f.engine.link(b, c);
  auto snapshot = [&] {
    std::vector<std::pair<std::vector<InstanceId>, std::vector<InstanceId>>> s;
    for (const auto& [id, inst] : f.engine.instances()) s.emplace_back(inst.parents, inst.children);
    return s;
  };
  const auto before = snapshot();
  CHECK_THROWS_AS(f.engine.link(c, a), TacticError);
  CHECK_THROWS_AS(f.engine.link(b, a), TacticError);
  CHECK_THROWS_AS(f.engine.link(a, a), TacticError);
  CHECK_THROWS_AS(f.engine.link(a, b), TacticError);
  CHECK(snapshot() == before);

  const auto n = f.invoke("negation", {}, {}, true);
  f.engine.link(a, n);
  CHECK_THROWS_AS(f.engine.link(b, n), TacticError);

  // Random DAG building never admits a cycle.
  Fixture g;
  std::vector<InstanceId> ids;
  for (int i = 0; i < 12; ++i) ids.push_back(g.invoke("probe", {}, {}, true));
  std::mt19937 rng(7);
  for (int k = 0; k < 400; ++k) {
    const auto p = ids[rng() % ids.size()], c2 = ids[rng() % ids.size()];
    try {
      g.engine.link(p, c2);
    } catch (const TacticError&) {
    }
    for (auto id : ids) {
      for (auto child : g.engine.find(id)->children) CHECK_FALSE(g.engine.reachable(child, id));
    }
  }
}

TEST_CASE("links into a started child are rejected") {
  Fixture f;
  const auto a = f.invoke("probe");
  const auto b = f.invoke("probe");
  f.tick();
  CHECK_THROWS_AS(f.engine.link(a, b), TacticError);
}

TEST_CASE("parameter validation") {
  Fixture f;
  f.db.create("explore_area", square(0, 0, 20));
  CHECK_THROWS_AS(f.invoke("overhead_scan", {}, {{"altitude", std::string("high")}}), TacticError);
  CHECK_THROWS_AS(f.invoke("overhead_scan", {}, {{"agent_count", 2.5}}), TacticError);
  CHECK_THROWS_AS(f.invoke("overhead_scan", {}, {{"bogus", 1.0}}), TacticError);
  CHECK_THROWS_AS(f.invoke("overhead_scan", {}, {{"altitude", 1.0}, {"altitude", 2.0}}), TacticError);
  CHECK_THROWS_AS(f.invoke("nope"), TacticError);
  const auto id = f.invoke("overhead_scan", {}, {{"altitude", 40LL}});
  const auto& p = f.engine.find(id)->view.params;
  REQUIRE(p.size() == 3);
  CHECK(p[0].first == "altitude");
  CHECK(p[0].second.as_real() == 40.0);
  CHECK(p[1].second.as_real() == 15.0);
  CHECK(p[2].second.as_int() == 4);

  // Errors reach the C2 as a reply, never as an exception.
  msg::TacticRequest r;
  r.request_id = 9;
  r.op = "invoke";
  r.definition = "overhead_scan";
  r.params = {{"cell_size", true}};
  const auto reply = f.engine.handle(r, f.world(), 0.0);
  CHECK(reply.status == "error");
  CHECK(reply.request_id == 9);
  CHECK(reply.error.has_value());
}

TEST_CASE("invalid runtime parameters fail the instance") {
  Fixture f;
  f.db.create("explore_area", square(0, 0, 20));
  const auto id = f.invoke("overhead_scan", {}, {{"cell_size", 0.0}});
  f.tick();
  CHECK(f.state(id) == TacticState::failed);
  CHECK(f.engine.find(id)->error.has_value());
}

TEST_CASE("context resolves to the nearest sketch of an accepted type") {
  Fixture f;
  const auto far = f.db.create("explore_area", square(100, 100, 20));
  const auto near = f.db.create("explore_area", square(0, 0, 20));
  f.db.create("route", {{30, 0, 0}, {40, 0, 0}});
  const auto id = f.invoke("overhead_scan", {25, 5, 0});
  REQUIRE(f.engine.find(id)->view.context.has_value());
  CHECK(f.engine.find(id)->view.context->id == near);
  const auto id2 = f.invoke("overhead_scan", {95, 95, 0});
  CHECK(f.engine.find(id2)->view.context->id == far);
  CHECK_THROWS_AS(f.invoke("examine_object", {0, 0, 0}), TacticError);

  f.buildings.push_back({7, "b7", {{50, 50}, {60, 50}, {60, 60}, {50, 60}}, 12.0, false});
  const auto s = f.invoke("scan_building", {45, 55, 0});
  CHECK(f.engine.find(s)->view.context->kind == ContextRef::Kind::building);
  CHECK(f.engine.find(s)->view.context->id == 7);
}

TEST_CASE("lawnmower waypoints and run partition") {
  const std::vector<Vec2> sq{{0, 0}, {20, 0}, {20, 20}, {0, 20}};
  const auto w = lawnmower(sq, 10.0);
  REQUIRE(w.size() == 4);
  CHECK(w[0] == Vec2{5, 5});
  CHECK(w[1] == Vec2{15, 5});
  CHECK(w[2] == Vec2{15, 15});
  CHECK(w[3] == Vec2{5, 15});

  const std::vector<Vec2> sliver{{0, 0}, {4, 0}, {4, 0.5}, {0, 0.5}};
  const auto c = lawnmower(sliver, 10.0);
  REQUIRE(c.size() == 1);
  CHECK(c[0].x == doctest::Approx(2.0));
  CHECK(c[0].y == doctest::Approx(0.25));

  CHECK(partition_runs(4, 2) == std::vector<std::size_t>{2, 2});
  CHECK(partition_runs(7, 3) == std::vector<std::size_t>{3, 2, 2});
  CHECK(partition_runs(2, 5) == std::vector<std::size_t>{1, 1});
  for (std::size_t n = 1; n < 40; ++n)
    for (std::size_t k = 1; k < 10; ++k) {
      const auto r = partition_runs(n, k);
      std::size_t sum = 0;
      for (auto x : r) sum += x;
      CHECK(sum == n);
      CHECK(r.size() == std::min(n, k));
      CHECK(*std::max_element(r.begin(), r.end()) - *std::min_element(r.begin(), r.end()) <= 1);
    }
}

TEST_CASE("overhead scan splits strips between agents") {
  Fixture f;
  f.db.create("explore_area", square(0, 0, 20));
  f.invoke("overhead_scan", {}, {{"cell_size", 10.0}, {"agent_count", 2LL}, {"altitude", 25.0}});
  const auto out = f.tick();
  REQUIRE(out.jobs.size() == 2);
  CHECK(out.jobs[0].waypoints == std::vector<Vec3>{{5, 5, 25}, {15, 5, 25}});
  CHECK(out.jobs[1].waypoints == std::vector<Vec3>{{15, 15, 25}, {5, 15, 25}});
  for (const auto& j : out.jobs) {
    CHECK(std::find(j.platforms.begin(), j.platforms.end(), msg::PlatformKind::ugv) == j.platforms.end());
  }
}

TEST_CASE("hold position stations") {
  const std::vector<Vec3> sq{{0, 0, 0}, {10, 0, 0}, {10, 10, 0}, {0, 10, 0}};
  const auto s = perimeter_stations(sq, true, 4);
  REQUIRE(s.size() == 4);
  CHECK(s[0].x == doctest::Approx(5));
  CHECK(s[0].y == doctest::Approx(0));
  CHECK(s[1].x == doctest::Approx(10));
  CHECK(s[1].y == doctest::Approx(5));
  CHECK(s[2].x == doctest::Approx(5));
  CHECK(s[2].y == doctest::Approx(10));
  CHECK(s[3].x == doctest::Approx(0));
  CHECK(s[3].y == doctest::Approx(5));

  const std::vector<Vec3> line{{0, 0, 0}, {30, 0, 0}};
  const auto m = perimeter_stations(line, false, 1);
  REQUIRE(m.size() == 1);
  CHECK(m[0].x == doctest::Approx(15));

  Fixture f;
  f.db.create("sector", {{0, 0, 0}, {10, 0, 0}, {10, 10, 0}, {0, 10, 0}});
  f.invoke("hold_position", {5, 5, 0}, {{"duration", 30.0}});
  const auto out = f.tick();
  REQUIRE(out.jobs.size() == 4);
  for (const auto& j : out.jobs) {
    CHECK(j.waypoints.size() == 1);
    CHECK(j.waypoints[0].z == 10.0);
    bool hold = false;
    for (const auto& [n, v] : j.params)
      if (n == "hold_s") hold = v.as_real() == 30.0;
    CHECK(hold);
  }
}

TEST_CASE("examine object orbits the point of interest") {
  Fixture f;
  f.db.create("poi", {{10, 20, 0}});
  f.invoke("examine_object", {10, 20, 0}, {{"radius", 4.0}});
  const auto out = f.tick();
  REQUIRE(out.jobs.size() == 1);
  const auto& w = out.jobs[0].waypoints;
  REQUIRE(w.size() == static_cast<std::size_t>(kOrbitWaypoints));
  for (const auto& p : w) {
    CHECK(std::hypot(p.x - 10, p.y - 20) == doctest::Approx(4.0));
    CHECK(p.z == kDefaultExamineAltitude);
  }
  CHECK(w[0].x == doctest::Approx(14));
  CHECK(w[2].y == doctest::Approx(24));
}

TEST_CASE("follow route with and without chaining") {
  Fixture f;
  f.db.create("route", {{0, 0, 0}, {10, 0, 0}, {20, 0, 0}, {20, 10, 0}});
  const auto plain = f.invoke("follow_route", {5, 0, 0});
  auto out = f.tick();
  REQUIRE(out.jobs.size() == 1);
  // Collinear middle vertex removed by simplification.
  CHECK(out.jobs[0].waypoints == std::vector<Vec3>{{0, 0, 10}, {20, 0, 10}, {20, 10, 10}});
  f.job_event(alloc::JobEventKind::succeeded, out.jobs[0].job_id);
  f.tick();
  CHECK(f.state(plain) == TacticState::completed);

  const auto chain = f.invoke("follow_route", {5, 0, 0}, {{"use_chaining", true}});
  out = f.tick();
  REQUIRE(out.jobs.size() == 1);
  CHECK(out.jobs[0].waypoints.size() == 1);
  f.job_event(alloc::JobEventKind::succeeded, out.jobs[0].job_id, 42);
  out = f.tick();
  REQUIRE(out.jobs.size() == 1);
  CHECK(out.jobs[0].selection == std::vector<AgentId>{42});
  f.job_event(alloc::JobEventKind::succeeded, out.jobs[0].job_id, 42);
  out = f.tick();
  REQUIRE(out.jobs.size() == 1);
  CHECK(f.state(chain) == TacticState::in_progress);
  f.job_event(alloc::JobEventKind::succeeded, out.jobs[0].job_id, 42);
  out = f.tick();
  CHECK(out.jobs.empty());
  CHECK(f.state(chain) == TacticState::completed);
}

TEST_CASE("majority rule decides completion") {
  for (int ok = 0; ok <= 4; ++ok) {
    Fixture f;
    const auto id = f.invoke("probe", {}, {{"jobs", 4LL}});
    auto out = f.tick();
    REQUIRE(out.jobs.size() == 4);
    for (int i = 0; i < 4; ++i)
      f.job_event(i < ok ? alloc::JobEventKind::succeeded : alloc::JobEventKind::failed, out.jobs[i].job_id);
    f.tick(1.0);
    CHECK(f.state(id) == (2 * ok >= 4 ? TacticState::completed : TacticState::failed));
    if (2 * ok < 4) CHECK(*f.engine.find(id)->error == std::to_string(ok) + " of 4 tasks succeeded");
  }
}

TEST_CASE("lasso selection restricts child jobs") {
  Fixture f;
  f.db.create("explore_area", square(0, 0, 40));
  Invocation inv;
  inv.definition = "overhead_scan";
  inv.selection = std::vector<AgentId>{3, 5};
  f.engine.invoke(inv, f.world(), 0.0);
  auto out = f.tick();
  REQUIRE_FALSE(out.jobs.empty());
  for (const auto& j : out.jobs) CHECK(j.selection == std::vector<AgentId>{3, 5});

  // A tactic narrowing to an agent outside the lasso matches nobody.
  Fixture g;
  g.db.create("route", {{0, 0, 0}, {10, 0, 0}, {10, 10, 0}});
  inv.definition = "follow_route";
  inv.params = {{"use_chaining", true}};
  inv.selection = std::vector<AgentId>{3};
  g.engine.invoke(inv, g.world(), 0.0);
  out = g.tick();
  g.job_event(alloc::JobEventKind::succeeded, out.jobs[0].job_id, 9);
  out = g.tick();
  REQUIRE(out.jobs.size() == 1);
  CHECK(out.jobs[0].selection == std::vector<AgentId>{kNoAgent});
}

TEST_CASE("cancel releases every live job") {
  Fixture f;
  const auto id = f.invoke("probe", {}, {{"jobs", 5LL}});
  const auto child = f.invoke("probe", {}, {}, true);
  f.engine.link(id, child);
  auto out = f.tick();
  REQUIRE(out.jobs.size() == 5);
  for (int i = 0; i < 5; ++i) f.job_event(alloc::JobEventKind::assigned, out.jobs[i].job_id, 10 + i);
  f.engine.cancel(id, 2.0);
  out = f.tick(2.0);
  CHECK(out.cancel_jobs.size() == 5);
  CHECK(f.state(id) == TacticState::failed);
  CHECK(*f.engine.find(id)->error == "cancelled");
  CHECK(f.state(child) == TacticState::failed);
  // Late events for cancelled jobs are ignored.
  f.job_event(alloc::JobEventKind::succeeded, out.cancel_jobs[0]);
  CHECK(f.state(id) == TacticState::failed);
}

TEST_CASE("status history is monotone and every job names its tactic") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Fixture f;
    std::vector<InstanceId> ids;
    for (int i = 0; i < 6; ++i) ids.push_back(f.invoke("probe", {}, {{"jobs", static_cast<long long>(rng() % 3)}}, true));
    for (int k = 0; k < 8; ++k) {
      try {
        f.engine.link(ids[rng() % 6], ids[rng() % 6]);
      } catch (const TacticError&) {
      }
    }
    for (auto id : ids) f.engine.issue(id);
    std::vector<msg::Job> live;
    std::vector<msg::TacticStatus> statuses;
    for (int t = 0; t < 30; ++t) {
      auto out = f.tick(t);
      for (auto& j : out.jobs) {
        CHECK(f.engine.find(j.tactic_id) != nullptr);
        const auto& jobs = f.engine.find(j.tactic_id)->jobs;
        CHECK(std::find(jobs.begin(), jobs.end(), j.job_id) != jobs.end());
        live.push_back(j);
      }
      statuses.insert(statuses.end(), out.statuses.begin(), out.statuses.end());
      if (!live.empty() && rng() % 2 == 0) {
        const auto j = live.back();
        live.pop_back();
        f.job_event(rng() % 3 == 0 ? alloc::JobEventKind::failed : alloc::JobEventKind::succeeded, j.job_id, 1, t);
      }
      if (rng() % 20 == 0) f.engine.cancel(ids[rng() % 6], t);
    }
    auto rank = [](TacticState s) { return terminal(s) ? 2 : static_cast<int>(s); };
    for (const auto& [id, inst] : f.engine.instances()) {
      for (std::size_t i = 1; i < inst.history.size(); ++i) {
        CHECK(rank(inst.history[i].second) > rank(inst.history[i - 1].second));
        CHECK(inst.history[i].first >= inst.history[i - 1].first);
      }
      CHECK(inst.history.front().second == TacticState::pending);
    }
    // Per instance, reported statuses follow the same order.
    std::map<InstanceId, int> last;
    for (const auto& s : statuses) {
      const int r = s.status == "pending" ? 0 : s.status == "in_progress" ? 1 : 2;
      auto [it, fresh] = last.emplace(*s.instance_id, r);
      if (!fresh) {
        CHECK(r > it->second);
        it->second = r;
      }
    }
  }
}

TEST_CASE("safe land picks distinct landing sites near a recovery point") {
  Fixture f;
  plan::OccupancyGrid grid({0, 0}, 1.0, 100, 100);
  f.db.create("recovery_point", {{50, 50, 0}});
  for (AgentId a : {1u, 2u, 3u}) {
    msg::Heartbeat h;
    h.agent_id = a;
    h.platform = msg::PlatformKind::quad;
    h.position = {10.0 * a, 0, 20};
    f.agents.ingest_heartbeat(h, 0.0);
  }
  msg::Heartbeat g;
  g.agent_id = 4;
  g.platform = msg::PlatformKind::ugv;
  f.agents.ingest_heartbeat(g, 0.0);
  auto w = f.world();
  w.ground_grid = &grid;
  Invocation inv;
  inv.definition = "safe_land";
  inv.selection = std::vector<AgentId>{1, 2, 3, 4};
  f.engine.invoke(inv, w, 0.0);
  const auto out = f.engine.tick(w, 0.0);
  REQUIRE(out.jobs.size() == 3);
  std::set<std::pair<double, double>> sites;
  for (const auto& j : out.jobs) {
    REQUIRE(j.waypoints.size() == 1);
    const auto p = j.waypoints[0];
    CHECK(std::hypot(p.x - 50, p.y - 50) <= kRecoveryRadius);
    CHECK(p.z == 0.0);
    sites.insert({p.x, p.y});
    CHECK(j.selection.size() == 1);
  }
  CHECK(sites.size() == 3);

  Fixture none;
  const auto id = none.invoke("safe_land");
  none.tick();
  CHECK(none.state(id) == TacticState::failed);
}

TEST_CASE("deploy follows an attached route and spreads over free cells") {
  Fixture f;
  plan::OccupancyGrid grid({0, 0}, 2.0, 50, 50);
  f.db.create("deploy_zone", square(20, 20, 20));
  f.db.create("route", {{0, 0, 0}, {10, 10, 0}, {15, 25, 0}});
  auto w = f.world();
  w.ground_grid = &grid;
  Invocation inv;
  inv.definition = "deploy";
  inv.position = {30, 30, 0};
  inv.params = {{"agent_count", 6LL}};
  f.engine.invoke(inv, w, 0.0);
  const auto out = f.engine.tick(w, 0.0);
  REQUIRE(out.jobs.size() == 6);
  std::set<std::pair<double, double>> targets;
  for (const auto& j : out.jobs) {
    REQUIRE(j.waypoints.size() == 4);
    CHECK(j.waypoints[0] == Vec3{0, 0, 0});
    CHECK(j.waypoints[2] == Vec3{15, 25, 0});
    const auto t = j.waypoints.back();
    CHECK(geom::point_in_polygon(t.xy(), geom::to_2d(square(20, 20, 20))));
    targets.insert({t.x, t.y});
    CHECK(j.platforms == std::vector<msg::PlatformKind>{msg::PlatformKind::ugv});
  }
  CHECK(targets.size() == 6);
}

TEST_CASE("scan building confirms it on completion") {
  Fixture f;
  f.buildings.push_back({3, "b3", {{0, 0}, {10, 0}, {10, 10}, {0, 10}}, 8.0, false});
  const auto id = f.invoke("scan_building", {5, -3, 0});
  auto out = f.tick();
  REQUIRE(out.jobs.size() == 1);
  const auto& w = out.jobs[0].waypoints;
  REQUIRE(w.size() == 5);
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    CHECK(geom::building_distance(f.buildings[0], w[i].xy()) == doctest::Approx(5.0 * std::sqrt(2.0)));
  f.job_event(alloc::JobEventKind::succeeded, out.jobs[0].job_id);
  f.tick();
  CHECK(f.state(id) == TacticState::completed);
  CHECK(f.confirmed == std::vector<geom::BuildingId>{3});
}

TEST_CASE("definitions round-trip through the wire encoding") {
  const auto reg = builtin_tactics();
  const auto types = geom::ParamTypeRegistry::with_builtins();
  const auto defs = reg.definitions();
  const auto encoded = encode_definitions(defs, types);
  const auto decoded = decode_definitions(encoded);
  REQUIRE(decoded.tactics.size() == reg.size());
  for (std::size_t i = 0; i < decoded.tactics.size(); ++i) {
    const auto& a = defs[i];
    const auto& b = decoded.tactics[i];
    CHECK(a.name == b.name);
    CHECK(a.contexts == b.contexts);
    CHECK(a.gate == b.gate);
    REQUIRE(a.params.size() == b.params.size());
    for (std::size_t k = 0; k < a.params.size(); ++k) {
      CHECK(a.params[k].name == b.params[k].name);
      CHECK(a.params[k].type == b.params[k].type);
      CHECK(a.params[k].default_value == b.params[k].default_value);
    }
  }
  CHECK(decoded.sketch_types.size() == types.types().size());
  const auto doc = documentation_table(defs);
  CHECK(doc.find("Overhead Scan") != std::string::npos);
  CHECK(doc.find("cell_size") != std::string::npos);
}
