#include "swarm/server/runner.hpp"

#include <chrono>
#include <random>
#include <thread>

namespace swarm::server {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

RunReport run(Mission& mission, const RunOptions& options) {
  const auto start = Clock::now();
  const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(kTickS));
  RunReport report;
  for (std::uint64_t i = 0; i < options.ticks; ++i) {
    if (options.stop && options.stop->load()) break;
    if (options.pace == Pace::realtime) std::this_thread::sleep_until(start + period * static_cast<long>(i));
    if (options.before_tick) options.before_tick(mission);
    mission.tick();
    ++report.ticks;
    if (options.after_tick) options.after_tick(mission);
  }
  report.wall_s = std::chrono::duration<double>(Clock::now() - start).count();
  report.hash = mission.hash();
  return report;
}

ReplayCheck verify_replay(const std::vector<ReplayRecord>& records) {
  ReplayCheck check;
  if (records.empty() || records.front().kind != RecordKind::header) {
    check.message = "log does not start with a header";
    return check;
  }
  if (records.back().kind != RecordKind::end) {
    check.message = "log has no end record (truncated?)";
    return check;
  }
  EndMarker end = end_marker(records.back());
  check.ticks = end.ticks;
  check.expected_hash = end.hash;

  json header = json::parse(std::string(records.front().payload.begin(), records.front().payload.end()));
  auto mission = Mission::from_text(header.at("scenario").get<std::string>(), header.at("seed").get<std::uint64_t>());

  std::size_t next_input = 0;
  std::vector<const ReplayRecord*> inputs;
  for (const auto& r : records) {
    if (r.kind == RecordKind::input) inputs.push_back(&r);
  }
  for (std::uint64_t t = 0; t < end.ticks; ++t) {
    while (next_input < inputs.size() && inputs[next_input]->tick == t) {
      const auto& p = inputs[next_input++]->payload;
      mission->submit(json::parse(std::string(p.begin(), p.end())));
    }
    mission->tick();
  }
  mission->finish();
  check.actual_hash = end_marker(mission->log().records().back()).hash;

  const auto& replayed = mission->log().records();
  std::size_t n = std::min(replayed.size(), records.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!(replayed[i] == records[i])) {
      check.first_divergence = i;
      break;
    }
  }
  if (!check.first_divergence && replayed.size() != records.size()) check.first_divergence = n;
  check.ok = check.actual_hash == check.expected_hash && !check.first_divergence;
  check.message = check.ok ? "replay matches" : "replay diverged";
  return check;
}

namespace {

json point(double x, double y) { return {{"type", "Point"}, {"coordinates", {x, y}}}; }

json rect_polygon(double x0, double y0, double w, double h) {
  return {{"type", "Polygon"},
          {"coordinates", json::array({json::array({{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + h}, {x0, y0 + h}, {x0, y0}})})}};
}

json feature(json geometry, json props) {
  return {{"type", "Feature"}, {"geometry", std::move(geometry)}, {"properties", std::move(props)}};
}

}  // namespace

std::string bench_scenario_text(int agents, std::uint64_t seed) {
  const int air = static_cast<int>(std::lround(agents * 84.0 / 174.0));
  const int vtol = static_cast<int>(std::lround(air * 24.0 / 84.0));
  const int quad = air - vtol;
  const int ugv = agents - air;
  const double site = 300.0;

  json features = json::array();
  // Three scan areas along the north, three deploy zones to the east.
  const double area_w = 90.0;
  for (int i = 0; i < 3; ++i) {
    double x0 = 15.0 + i * 95.0;
    features.push_back(feature(rect_polygon(x0, 200.0, area_w, 90.0), {{"kind", "explore_area"}, {"ref", "area" + std::to_string(i + 1)}}));
  }
  for (int i = 0; i < 3; ++i) {
    double y0 = 20.0 + i * 60.0;
    features.push_back(feature(rect_polygon(200.0, y0, 60.0, 45.0), {{"kind", "deploy_zone"}, {"ref", "zone" + std::to_string(i + 1)}}));
  }
  // Building blocks between the base and the deploy zones.
  int bid = 1;
  for (int bx = 0; bx < 3; ++bx) {
    for (int by = 0; by < 3; ++by) {
      features.push_back(feature(rect_polygon(90.0 + bx * 35.0, 40.0 + by * 45.0, 18.0, 18.0),
                                 {{"kind", "building"}, {"id", bid}, {"label", "B" + std::to_string(bid)}, {"height", 8.0 + 2 * bx}}));
      ++bid;
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(5.0, site - 5.0);
  const char* roles[] = {"person", "device", "hvt", "hostile", "medic", "benign", "intel"};
  for (int i = 0; i < 300; ++i) {
    double x = u(rng);
    double y = u(rng);
    features.push_back(feature(point(x, y), {{"kind", "artifact"}, {"role", roles[i % 7]}, {"outer_id", i + 1}, {"inner_id", 10000 + i + 1}, {"dynamic", i % 50 == 0}}));
  }

  json roster = json::array();
  // Base near the middle so the mesh reaches both the scan areas and the
  // deploy zones.
  const json spawn = {150.0, 110.0};
  if (quad > 0) roster.push_back({{"platform", "quad"}, {"count", quad}, {"spawn", {130.0, 165.0}}});
  if (vtol > 0) roster.push_back({{"platform", "vtol"}, {"count", vtol}, {"spawn", {170.0, 165.0}}});
  if (ugv > 0) roster.push_back({{"platform", "ugv"}, {"count", ugv}, {"spawn", {200.0, 118.0}}});

  json script = json::array();
  const int air_share = std::max(1, air / 3);
  const int ugv_share = std::max(1, ugv / 3);
  for (int i = 0; i < 3; ++i) {
    script.push_back({{"at", 2.0},
                      {"command",
                       {{"type", "invoke"},
                        {"tactic", "overhead_scan"},
                        {"position", {60.0 + i * 95.0, 245.0}},
                        {"params", {{"agent_count", air_share}}},
                        {"ref", "scan" + std::to_string(i + 1)}}}});
  }
  for (int i = 0; i < 3; ++i) {
    script.push_back({{"at", 2.0},
                      {"command",
                       {{"type", "invoke"},
                        {"tactic", "deploy"},
                        {"position", {230.0, 42.0 + i * 60.0}},
                        {"params", {{"agent_count", ugv_share}}},
                        {"ref", "deploy" + std::to_string(i + 1)}}}});
  }

  json doc = {{"type", "FeatureCollection"},
              {"properties",
               {{"name", "site-" + std::to_string(agents)},
                {"seed", seed},
                {"duration_s", 600.0},
                {"bounds", {{"origin", {0.0, 0.0}}, {"cell_size", 2.5}, {"width", 128}, {"height", 128}}},
                {"network", {{"radio_range_m", 160.0}, {"loss_prob", 0.0}, {"hop_latency_s", 0.01}}},
                {"base", spawn},
                {"roster", roster},
                {"script", script}}},
              {"features", features}};
  return doc.dump(1);
}

BenchReport bench(int agents, std::uint64_t ticks) {
  auto mission = Mission::from_text(bench_scenario_text(agents));
  mission->log().set_retain(false);
  RunOptions opt;
  opt.ticks = ticks;
  RunReport r = run(*mission, opt);
  BenchReport b;
  b.agents = agents;
  b.ticks = r.ticks;
  b.wall_s = r.wall_s;
  b.hz = r.wall_s > 0 ? static_cast<double>(r.ticks) / r.wall_s : 0.0;
  b.assigned_agents = mission->stats().assigned_agents.size();
  return b;
}

}  // namespace swarm::server
