#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "swarm/server/buildings.hpp"
#include "swarm/server/console.hpp"
#include "swarm/server/mission.hpp"
#include "swarm/server/runner.hpp"
#include "swarm/server/scenario.hpp"

using namespace swarm;
using namespace swarm::server;
using nlohmann::json;

namespace {

json rect(double x0, double y0, double w, double h) {
  return {{"type", "Polygon"},
          {"coordinates", json::array({json::array({{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}, {x0, y0}})})}};
}

json feature(json geometry, json props) {
  return {{"type", "Feature"}, {"geometry", std::move(geometry)}, {"properties", std::move(props)}};
}

json collection(json props, json features = json::array()) {
  return {{"type", "FeatureCollection"}, {"properties", std::move(props)}, {"features", std::move(features)}};
}

std::unique_ptr<Mission> mission_of(const json& doc, std::optional<std::uint64_t> seed = {}) {
  return Mission::from_text(doc.dump(), seed);
}

std::vector<json> events(const Mission& m, const std::string& name) {
  std::vector<json> out;
  for (const auto& r : m.log().records()) {
    if (r.kind != RecordKind::event) continue;
    json e = json::parse(std::string(r.payload.begin(), r.payload.end()));
    if (e.value("event", "") == name) out.push_back(e);
  }
  return out;
}

// 50 quads holding around an explore area at 10 m.
json hover_scenario() {
  json props = {{"name", "hover"},
                {"bounds", {{"origin", {0, 0}}, {"cell_size", 2.0}, {"width", 64}, {"height", 64}}},
                {"network", {{"radio_range_m", 200.0}}},
                {"base", {20, 20}},
                {"roster", json::array({{{"platform", "quad"}, {"count", 50}, {"spawn", {30, 30}}}})},
                {"script", json::array({{{"at", 1.0},
                                         {"command",
                                          {{"type", "invoke"},
                                           {"tactic", "hold_position"},
                                           {"position", {60, 60}},
                                           {"params", {{"agent_count", 50}, {"duration", 600.0}}}}}}})}};
  return collection(props, json::array({feature(rect(40, 40, 40, 40), {{"kind", "explore_area"}})}));
}

int airborne_count(const Mission& m) {
  return static_cast<int>(std::count_if(m.agents().begin(), m.agents().end(), [](const sim::Agent& a) { return a.airborne(); }));
}

}  // namespace

TEST_CASE("empty scenario is a valid empty world") {
  Scenario s = parse_scenario_text(R"({"type":"FeatureCollection","features":[]})");
  CHECK(s.agent_count() == 0);
  CHECK(s.buildings.empty());
  CHECK(s.artifacts.empty());
  REQUIRE(s.c2.size() == 1);
  auto m = Mission::from_text(R"({"type":"FeatureCollection","features":[]})");
  m->run_ticks(20);
  CHECK(m->agents().empty());
  CHECK(m->stats().double_assignments == 0);
}

TEST_CASE("scale fixture keeps 45 buildings and 1901 artifacts") {
  json features = json::array();
  for (int i = 0; i < 45; ++i) {
    features.push_back(feature(rect((i % 9) * 30.0, (i / 9) * 30.0, 12, 12), {{"kind", "building"}, {"id", i + 1}}));
  }
  for (int i = 0; i < 1901; ++i) {
    features.push_back(feature({{"type", "Point"}, {"coordinates", {i % 300 + 0.5, i / 300 * 7.0}}},
                               {{"kind", "artifact"}, {"role", "person"}, {"outer_id", i + 1}, {"dynamic", i < 26}}));
  }
  Scenario s = parse_scenario(collection({{"name", "scale"}}, features));
  CHECK(s.buildings.size() == 45);
  CHECK(s.artifacts.size() == 1901);
  CHECK(std::count_if(s.artifacts.begin(), s.artifacts.end(), [](const sim::Artifact& a) { return a.dynamic; }) == 26);
  // The closing vertex is not a corner.
  CHECK(s.buildings.front().footprint.size() == 4);
}

TEST_CASE("a two-vertex polygon is rejected naming the feature") {
  json bad = feature({{"type", "Polygon"}, {"coordinates", json::array({json::array({{0, 0}, {5, 0}, {0, 0}})})}},
                     {{"kind", "building"}, {"id", 7}, {"label", "B7"}});
  json doc = collection(json::object(), json::array({feature(rect(0, 20, 5, 5), {{"kind", "building"}, {"id", 1}}), bad}));
  try {
    parse_scenario(doc);
    FAIL("expected a ScenarioError");
  } catch (const ScenarioError& e) {
    std::string what = e.what();
    CHECK(what.find("features[1]") != std::string::npos);
    CHECK(what.find("B7") != std::string::npos);
    CHECK(what.find("3 vertices") != std::string::npos);
  }
}

TEST_CASE("scenario schema errors carry the path") {
  CHECK_THROWS_WITH_AS(parse_scenario_text("{"), doctest::Contains("JSON"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario_text(R"({"type":"Feature"})"), ScenarioError);
  json doc = collection({{"roster", json::array({{{"platform", "blimp"}, {"count", 1}, {"spawn", {0, 0}}}})}});
  CHECK_THROWS_WITH_AS(parse_scenario(doc), doctest::Contains("roster[0]"), ScenarioError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.geojson"), ScenarioError);
}

TEST_CASE("no-go layers by sketch type") {
  using plan::Layer;
  CHECK(no_go_layers("curb") == plan::layer_bit(Layer::ground));
  CHECK(no_go_layers("powerline") == plan::layer_bit(Layer::low_air));
  CHECK(no_go_layers("wall") == (plan::layer_bit(Layer::ground) | plan::layer_bit(Layer::low_air)));
  CHECK(no_go_layers("no_go_zone") == plan::kAllLayers);
}

TEST_CASE("roster of 174 keeps 84 air and 90 ground, all heartbeating") {
  auto m = Mission::from_text(bench_scenario_text(174));
  REQUIRE(m->agents().size() == 174);
  int air = 0;
  for (const auto& a : m->agents()) {
    air += msg::is_air(a.state().platform);
    CHECK(a.state().fidelity == 1);
  }
  CHECK(air == 84);
  m->run_ticks(15);
  CHECK(m->agent_table().size() == 174);
  for (const auto& a : m->agents()) {
    const auto* e = m->agent_table().find(a.id());
    REQUIRE(e != nullptr);
    CHECK(e->last.platform == a.state().platform);
  }
}

TEST_CASE("spawned agents start heartbeating") {
  auto m = mission_of(collection({{"network", {{"radio_range_m", 500.0}}}}));
  m->submit({{"type", "spawn"}, {"platform", "ugv"}, {"payload", "EW"}, {"count", 4}, {"position", {10, 10}}});
  m->run_ticks(12);
  INFO((m->stats().input_errors.empty() ? std::string() : m->stats().input_errors[0]));
  REQUIRE(m->agents().size() == 4);
  CHECK(m->agent_table().size() == 4);
  CHECK(m->agents()[0].state().payload == msg::PayloadKind::ew);
  CHECK_THROWS_AS(m->submit({{"type", "spawn"}, {"platform", "ugv"}, {"count", 20000}, {"position", {0, 0}}}), CommandError);
}

TEST_CASE("tick count 0 gives a log of just header and end") {
  auto m = Mission::from_text(bench_scenario_text(10));
  m->finish();
  const auto& r = m->log().records();
  REQUIRE(r.size() == 2);
  CHECK(r[0].kind == RecordKind::header);
  CHECK(r[1].kind == RecordKind::end);
  CHECK(end_marker(r[1]).ticks == 0);
  CHECK(end_marker(r[1]).hash == m->hash());
  json header = json::parse(std::string(r[0].payload.begin(), r[0].payload.end()));
  CHECK(header["seed"] == 1);
}

TEST_CASE("same seed gives the same hash, another seed does not") {
  auto run = [](std::uint64_t seed) {
    auto m = Mission::from_text(bench_scenario_text(30), seed);
    m->run_ticks(150);
    m->finish();
    return m->hash();
  };
  const auto a = run(3);
  CHECK(run(3) == a);
  CHECK(run(4) != a);
}

TEST_CASE("recorded log replays to the same hash") {
  auto m = Mission::from_text(bench_scenario_text(20), 9);
  std::ostringstream out;
  m->log().set_sink(&out);
  m->run_ticks(40);
  m->submit({{"type", "invoke"}, {"tactic", "hold_position"}, {"position", {60, 245}}, {"params", {{"agent_count", 2}}}});
  m->run_ticks(40);
  m->finish();
  std::string bytes = out.str();
  auto records = parse_replay(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
  CHECK(records == m->log().records());

  ReplayCheck ok = verify_replay(records);
  CHECK(ok.ok);
  CHECK(ok.ticks == 80);
  CHECK(ok.actual_hash == m->hash());

  // Drop the console input: the re-simulation no longer matches.
  auto tampered = records;
  tampered.erase(std::find_if(tampered.begin(), tampered.end(), [](const ReplayRecord& r) { return r.kind == RecordKind::input; }));
  ReplayCheck bad = verify_replay(tampered);
  CHECK_FALSE(bad.ok);
  CHECK(bad.first_divergence.has_value());

  auto truncated = records;
  truncated.pop_back();
  CHECK_FALSE(verify_replay(truncated).ok);
}

TEST_CASE("replay records reject truncation") {
  ReplayLog log;
  log.append_text(RecordKind::header, 0, "{}");
  log.append_text(RecordKind::event, 3, R"({"event":"x"})");
  log.finish(4);
  wire::Bytes all;
  for (const auto& r : log.records()) {
    auto b = serialize_record(r);
    all.insert(all.end(), b.begin(), b.end());
  }
  CHECK(parse_replay(all) == log.records());
  all.pop_back();
  CHECK_THROWS_AS(parse_replay(all), ReplayError);
}

TEST_CASE("e-stop lands and disarms 50 airborne agents within one tick") {
  for (bool partitioned : {false, true}) {
    CAPTURE(partitioned);
    auto m = mission_of(hover_scenario());
    for (int i = 0; i < 900 && airborne_count(*m) < 50; ++i) m->tick();
    REQUIRE(airborne_count(*m) == 50);
    // A total partition must not matter: the stop goes out of band.
    m->set_partitioned(partitioned);
    m->submit({{"type", "estop"}});
    m->tick();
    CHECK(airborne_count(*m) == 0);
    for (const auto& a : m->agents()) {
      CHECK(a.state().status == msg::AgentStatus::disabled);
      CHECK(a.state().position.z == 0.0);
      CHECK_FALSE(a.current_job());
    }
    auto stops = events(*m, "estop");
    REQUIRE(stops.size() == 1);
    CHECK(stops[0]["agents"] == 50);
    CHECK(m->auctioneer().assigned().empty());
  }
}

TEST_CASE("e-stop is a no-op for ground vehicles") {
  json props = {{"network", {{"radio_range_m", 200.0}}},
                {"roster", json::array({{{"platform", "ugv"}, {"count", 6}, {"spawn", {20, 20}}}})}};
  auto m = mission_of(collection(props));
  m->run_ticks(5);
  std::vector<msg::AgentStatus> before;
  for (const auto& a : m->agents()) before.push_back(a.state().status);
  m->submit({{"type", "estop"}});
  m->tick();
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(m->agents()[i].state().status == before[i]);
  REQUIRE(events(*m, "estop").size() == 1);
  CHECK(events(*m, "estop")[0]["agents"] == 0);
}

TEST_CASE("building state follows detections") {
  std::vector<geom::Building> b(2);
  b[0].id = 1;
  b[0].footprint = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  b[1].id = 2;
  b[1].footprint = {{40, 0}, {50, 0}, {50, 10}, {40, 10}};
  BuildingTracker t(b);

  SUBCASE("no detections leaves everything unconfirmed") {
    for (const auto& [id, st] : t.states()) CHECK(st == BuildingState{id});
  }
  SUBCASE("a building label confirms the nearest building") {
    msg::Detection d;
    d.role = msg::ArtifactRole::building_label;
    d.position = {12, 5, 0};
    auto changed = t.update(d);
    REQUIRE(changed.size() == 1);
    CHECK(changed[0].id == 1);
    CHECK(t.find(1)->confirmed);
    CHECK_FALSE(t.find(2)->confirmed);
    CHECK(t.update(d).empty());
    // Too far from either.
    d.position = {25, 40, 0};
    CHECK(t.update(d).empty());
  }
  SUBCASE("a hostile inside the footprint marks a threat") {
    msg::Detection d;
    d.role = msg::ArtifactRole::hostile;
    d.inner_id = 5;
    d.position = {45, 5, 0};
    auto changed = t.update(d);
    REQUIRE(changed.size() == 1);
    CHECK(changed[0] == BuildingState{2, false, true, false});
    // Outer tag only: not yet known to be hostile.
    msg::Detection outer = d;
    outer.inner_id.reset();
    outer.position = {5, 5, 0};
    CHECK(t.update(outer).empty());
  }
  SUBCASE("intel inside a footprint") {
    msg::Detection d;
    d.role = msg::ArtifactRole::intel;
    d.position = {3, 3, 0};
    t.update(d);
    CHECK(t.find(1)->contains_intel);
    CHECK_FALSE(t.find(1)->confirmed);
  }
  CHECK(t.confirm(2).has_value());
  CHECK_FALSE(t.confirm(2).has_value());
  CHECK_FALSE(t.confirm(99).has_value());
}

TEST_CASE("console command validation") {
  CHECK_NOTHROW(validate_command({{"type", "estop"}}));
  CHECK_NOTHROW(validate_command({{"type", "invoke"}, {"tactic", "overhead_scan"}, {"position", {1, 2}}}));
  CHECK_NOTHROW(validate_command({{"type", "sketch_create"}, {"sketch_type", "poi"}, {"vertices", {{1, 2}}}}));
  CHECK_THROWS_AS(validate_command(json::array()), CommandError);
  CHECK_THROWS_AS(validate_command({{"tactic", "x"}}), CommandError);
  CHECK_THROWS_AS(validate_command({{"type", "teleport"}}), CommandError);
  CHECK_THROWS_AS(validate_command({{"type", "invoke"}, {"position", {1, 2}}}), CommandError);
  CHECK_THROWS_AS(validate_command({{"type", "invoke"}, {"tactic", "x"}, {"position", {1}}}), CommandError);
  CHECK_THROWS_AS(validate_command({{"type", "sketch_create"}, {"sketch_type", "poi"}, {"vertices", {{1, "a"}}}}), CommandError);
  CHECK_THROWS_AS(validate_command({{"type", "link_add"}, {"parent", 1}}), CommandError);
  CHECK_THROWS_AS(validate_command({{"type", "spawn"}, {"platform", "ugv"}, {"count", -1}, {"position", {0, 0}}}), CommandError);
  CHECK(is_c2_command("invoke"));
  CHECK(is_c2_command("lasso"));
  CHECK_FALSE(is_c2_command("estop"));
  CHECK_FALSE(is_c2_command("spawn"));
  CHECK_FALSE(is_c2_command("fidelity"));
}

TEST_CASE("params convert both ways") {
  json j = {{"altitude", 12.5}, {"agent_count", 3}, {"use_chaining", true}, {"label", "n"}};
  auto params = params_from_json(j);
  CHECK(to_json(params) == j);
  CHECK(to_json(Vec3{1, 2, 3}) == json::array({1.0, 2.0, 3.0}));
  CHECK(vec3_from_json(json::array({4, 5}), "p") == Vec3{4, 5, 0});
}

TEST_CASE("refs resolve through the C2 and links are acknowledged") {
  json props = {{"network", {{"radio_range_m", 300.0}}},
                {"base", {20, 20}},
                {"roster", json::array({{{"platform", "quad"}, {"count", 4}, {"spawn", {20, 30}}}})}};
  auto m = mission_of(collection(props));
  m->submit({{"type", "sketch_create"}, {"sketch_type", "explore_area"}, {"vertices", {{40, 40}, {80, 40}, {80, 80}, {40, 80}}}, {"ref", "a"}});
  m->submit({{"type", "invoke"}, {"tactic", "overhead_scan"}, {"position", {60, 60}}, {"params", {{"agent_count", 2}}}, {"ref", "scan"}});
  m->submit({{"type", "invoke"}, {"tactic", "hold_position"}, {"position", {60, 60}}, {"deferred", true}, {"params", {{"agent_count", 2}}}, {"ref", "hold"}});
  m->submit({{"type", "link_add"}, {"parent", "scan"}, {"child", "hold"}});
  m->run_ticks(40);

  const C2Node& c2 = m->c2();
  CHECK(c2.errors().empty());
  REQUIRE(c2.sketch_ref("a").has_value());
  auto scan = c2.instance_ref("scan");
  auto hold = c2.instance_ref("hold");
  REQUIRE(scan.has_value());
  REQUIRE(hold.has_value());
  const auto& inst = m->engine().instances().at(*hold);
  CHECK(inst.parents == std::vector<msg::InstanceId>{*scan});
  CHECK(c2.tactics().at(*hold).parents == std::vector<msg::InstanceId>{*scan});

  // Closing the loop is refused.
  m->submit({{"type", "link_add"}, {"parent", "hold"}, {"child", "scan"}});
  m->run_ticks(20);
  CHECK_FALSE(c2.errors().empty());
  CHECK(m->engine().instances().at(*scan).parents.empty());

  // Unknown refs are rejected at the C2 rather than guessed.
  auto before = c2.errors().size();
  m->submit({{"type", "cancel"}, {"instance", "nope"}});
  m->run_ticks(2);
  CHECK(c2.errors().size() == before + 1);
}

TEST_CASE("lasso selection scopes an invocation") {
  json props = {{"network", {{"radio_range_m", 300.0}}},
                {"roster", json::array({{{"platform", "quad"}, {"count", 9}, {"spawn", {20, 20}}, {"spacing", 5.0}}})}};
  auto m = mission_of(collection(props));
  m->run_ticks(15);
  // Lasso the left column of the 3x3 block.
  const auto& agents = m->agents();
  double min_x = agents[0].state().position.x;
  for (const auto& a : agents) min_x = std::min(min_x, a.state().position.x);
  m->submit({{"type", "lasso"}, {"vertices", {{min_x - 1, 0}, {min_x + 1, 0}, {min_x + 1, 60}, {min_x - 1, 60}}}});
  m->run_ticks(2);
  std::vector<AgentId> sel(m->c2().selection().begin(), m->c2().selection().end());
  REQUIRE(sel.size() == 3);
  m->submit({{"type", "sketch_create"}, {"sketch_type", "explore_area"}, {"vertices", {{40, 40}, {80, 40}, {80, 80}, {40, 80}}}});
  m->submit({{"type", "invoke"}, {"tactic", "hold_position"}, {"position", {60, 60}}, {"use_selection", true}, {"params", {{"agent_count", 9}}}});
  m->run_ticks(40);
  for (AgentId id : m->stats().assigned_agents) CHECK(std::find(sel.begin(), sel.end(), id) != sel.end());
  CHECK(m->stats().assigned_agents.size() == 3);
}

TEST_CASE("snapshot shape") {
  auto m = Mission::from_text(bench_scenario_text(12));
  m->run_ticks(30);
  json s = m->snapshot();
  CHECK(s["type"] == "snapshot");
  CHECK(s["tick"] == 30);
  CHECK(s["agents"].size() == 12);
  CHECK(s["tactics"].size() == 6);
  CHECK(s["buildings"].size() == 9);
  for (const auto& b : s["buildings"]) CHECK(b["pattern"] == "checkerboard");
  CHECK(s.contains("coverage"));
  CHECK_FALSE(m->snapshot(false).contains("coverage"));
  json h = m->hello();
  CHECK(h["type"] == "hello");
  CHECK(h["tactics"].size() >= 10);
}
