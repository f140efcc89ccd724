#include <algorithm>
#include <cmath>

#include "swarm/server/console.hpp"
#include "swarm/server/mission.hpp"

namespace swarm::server {

using nlohmann::json;

namespace {

/// Console coverage overlay resolution.
constexpr double kOverlayCell = 5.0;

std::string_view tactic_color(const std::string& status) {
  if (status == "pending") return "black";
  if (status == "in_progress") return "blue";
  if (status == "failed") return "red";
  if (status == "completed") return "green";
  return "gray";
}

json sketch_json(const geom::Sketch& s, const geom::ParamTypeRegistry& types) {
  json j = {{"id", geom::sketch_id(s)}, {"type", geom::sketch_type(s)}};
  json verts = json::array();
  if (const auto* p = std::get_if<geom::SketchPoint>(&s)) {
    verts.push_back(to_json(p->position));
    j["closed"] = false;
  } else {
    const auto& l = std::get<geom::SketchPolyline>(s);
    for (const auto& v : l.vertices) verts.push_back(to_json(v));
    j["closed"] = l.closed;
  }
  j["vertices"] = std::move(verts);
  if (const auto* t = types.find(geom::sketch_type(s))) {
    j["color"] = t->color;
    j["line_width"] = t->line_width;
    j["no_go"] = t->no_go;
  }
  return j;
}

}  // namespace

json Mission::hello() const {
  json tactics = json::array();
  for (const auto& d : engine_.registry().definitions()) {
    json params = json::array();
    for (const auto& p : d.params) {
      params.push_back({{"name", p.name},
                        {"type", tactics::to_string(p.type)},
                        {"default", to_json(p.default_value)},
                        {"description", p.description}});
    }
    tactics.push_back({{"name", d.name},
                       {"title", d.title},
                       {"description", d.description},
                       {"gesture", d.gesture},
                       {"contexts", d.contexts},
                       {"params", std::move(params)}});
  }
  json types = json::array();
  for (const auto& [name, t] : sketches_.registry().types()) {
    types.push_back({{"name", name},
                     {"kind", t.kind == geom::SketchKind::point ? "point" : "polyline"},
                     {"closed", t.closed},
                     {"no_go", t.no_go},
                     {"color", t.color},
                     {"command", t.command}});
  }
  return {{"type", "hello"},
          {"scenario", scenario_.name},
          {"seed", seed_},
          {"tick_s", kTickS},
          {"bounds",
           {{"origin", {scenario_.bounds.origin.x, scenario_.bounds.origin.y}},
            {"cell_size", scenario_.bounds.cell_size},
            {"width", scenario_.bounds.width},
            {"height", scenario_.bounds.height}}},
          {"tactics", std::move(tactics)},
          {"sketch_types", std::move(types)}};
}

json Mission::snapshot(bool with_coverage) const {
  const double t = now();
  const C2Node& op = c2_.front();
  json j = {{"type", "snapshot"}, {"tick", tick_}, {"time", t}, {"c2", op.id()}};

  json agents = json::array();
  for (const auto& [id, e] : op.agents().entries()) {
    auto status = op.agents().display_status(id, t).value_or(msg::DisplayStatus::unknown);
    agents.push_back({{"id", id},
                      {"platform", msg::to_string(e.last.platform)},
                      {"payload", msg::to_string(e.last.payload)},
                      {"position", to_json(e.last.position)},
                      {"battery", e.last.battery},
                      {"status", msg::to_string(status)},
                      {"color", msg::status_color(status)},
                      {"task", e.last.task_id ? json(*e.last.task_id) : json(nullptr)},
                      {"fidelity", e.last.fidelity},
                      {"config_hash", e.last.config_hash},
                      {"selected", op.selection().contains(id)}});
  }
  j["agents"] = std::move(agents);

  json tactics = json::array();
  for (const auto& [id, v] : op.tactics()) {
    tactics.push_back({{"id", id},
                       {"definition", v.definition},
                       {"status", v.status},
                       {"color", tactic_color(v.status)},
                       {"error", v.error ? json(*v.error) : json(nullptr)},
                       {"children", v.children},
                       {"parents", v.parents}});
  }
  j["tactics"] = std::move(tactics);

  json sketches = json::array();
  for (const auto& [id, s] : op.sketches().all()) sketches.push_back(sketch_json(s, op.sketches().registry()));
  j["sketches"] = std::move(sketches);

  json artifacts = json::array();
  for (const auto& [outer, e] : op.store().entries()) {
    artifacts.push_back({{"outer_id", outer},
                         {"inner_id", e.inner_id ? json(*e.inner_id) : json(nullptr)},
                         {"role", msg::to_string(e.role)},
                         {"identified", e.identified},
                         {"position", to_json(e.position)},
                         {"reports", e.reporters.size()}});
  }
  j["artifacts"] = std::move(artifacts);

  json buildings = json::array();
  for (const auto& b : scenario_.buildings) {
    const BuildingState* st = buildings_.find(b.id);
    bool confirmed = st && st->confirmed;
    json tint = json::array();
    if (st && st->contains_threat) tint.push_back("red");
    if (st && st->contains_intel) tint.push_back("blue");
    json footprint = json::array();
    for (const auto& p : b.footprint) footprint.push_back({p.x, p.y});
    buildings.push_back({{"id", b.id},
                         {"label", b.label},
                         {"footprint", std::move(footprint)},
                         {"height", b.height},
                         {"known", b.known},
                         {"confirmed", confirmed},
                         {"contains_threat", st && st->contains_threat},
                         {"contains_intel", st && st->contains_intel},
                         {"pattern", confirmed ? "solid" : (b.known ? "checkerboard" : "hidden")},
                         {"tint", std::move(tint)}});
  }
  j["buildings"] = std::move(buildings);

  if (with_coverage) {
    const auto& bnd = scenario_.bounds;
    double cell = std::max(kOverlayCell, coverage_.voxel_size());
    auto w = static_cast<std::uint32_t>(std::ceil(bnd.width * bnd.cell_size / cell));
    auto h = static_cast<std::uint32_t>(std::ceil(bnd.height * bnd.cell_size / cell));
    json values = json::array();
    for (std::uint32_t y = 0; y < h; ++y) {
      for (std::uint32_t x = 0; x < w; ++x) {
        geom::Vec2 c = bnd.origin + geom::Vec2{(x + 0.5) * cell, (y + 0.5) * cell};
        auto last = coverage_.last_seen(coverage_.voxel_of(c));
        values.push_back(last ? 1.0 - coverage::fade(*last, t) : coverage::kNeverSeen);
      }
    }
    j["coverage"] = {{"name", "coverage"},
                     {"origin", {bnd.origin.x, bnd.origin.y}},
                     {"cell_size", cell},
                     {"width", w},
                     {"height", h},
                     {"values", std::move(values)}};
  }

  std::vector<const IntelMessage*> intel;
  for (const auto& m : op.intel()) intel.push_back(&m);
  std::stable_sort(intel.begin(), intel.end(), [](const IntelMessage* a, const IntelMessage* b) {
    return a->priority != b->priority ? a->priority < b->priority : a->time > b->time;
  });
  json msgs = json::array();
  for (const auto* m : intel) {
    msgs.push_back({{"time", m->time},
                    {"priority", m->priority},
                    {"text", m->text},
                    {"outer_id", m->outer_id},
                    {"position", to_json(m->position)}});
  }
  j["intel"] = std::move(msgs);
  j["selection"] = op.selection();
  json errors = json::array();
  const auto& errs = op.errors();
  for (std::size_t i = errs.size() > 20 ? errs.size() - 20 : 0; i < errs.size(); ++i) errors.push_back(errs[i]);
  const auto& in = stats_.input_errors;
  for (std::size_t i = in.size() > 20 ? in.size() - 20 : 0; i < in.size(); ++i) errors.push_back(in[i]);
  j["errors"] = std::move(errors);
  j["assigned_agents"] = stats_.assigned_agents.size();
  return j;
}

}  // namespace swarm::server
