#include "swarm/server/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "swarm/geom/sketch.hpp"

namespace swarm::server {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ScenarioError(path + ": " + what); }

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return number(*it, path + "." + key);
}

std::string text_or(const json& obj, const char* key, std::string fallback, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) fail(path + "." + key, "expected a string");
  return it->get<std::string>();
}

bool bool_or(const json& obj, const char* key, bool fallback, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) fail(path + "." + key, "expected a boolean");
  return it->get<bool>();
}

Vec3 position(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() < 2 || j.size() > 3) fail(path, "expected [x, y] or [x, y, z]");
  Vec3 p{number(j[0], path + "[0]"), number(j[1], path + "[1]"), 0.0};
  if (j.size() == 3) p.z = number(j[2], path + "[2]");
  return p;
}

std::vector<Vec3> positions(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a coordinate array");
  std::vector<Vec3> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(position(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// GeoJSON rings repeat the first vertex at the end.
std::vector<Vec3> open_ring(std::vector<Vec3> ring) {
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  return ring;
}

struct Geometry {
  std::string type;
  std::vector<Vec3> vertices;
};

Geometry geometry(const json& feature, const std::string& path) {
  auto it = feature.find("geometry");
  if (it == feature.end() || !it->is_object()) fail(path, "missing geometry");
  const json& g = *it;
  std::string type = text_or(g, "type", "", path + ".geometry");
  if (!g.contains("coordinates")) fail(path + ".geometry", "missing coordinates");
  const json& c = g["coordinates"];
  std::string cpath = path + ".geometry.coordinates";
  if (type == "Point") return {type, {position(c, cpath)}};
  if (type == "LineString") {
    auto v = positions(c, cpath);
    if (v.size() < 2) fail(path, "line needs at least 2 vertices");
    return {type, v};
  }
  if (type == "Polygon") {
    if (!c.is_array() || c.empty()) fail(cpath, "expected an array of rings");
    auto v = open_ring(positions(c[0], cpath + "[0]"));
    std::set<std::pair<double, double>> distinct;
    for (const auto& p : v) distinct.insert({p.x, p.y});
    if (distinct.size() < 3) fail(path, "polygon needs at least 3 vertices");
    return {type, v};
  }
  fail(path + ".geometry.type", "unsupported geometry '" + type + "'");
}

std::string describe(const std::string& kind, const json& props, std::size_t index) {
  std::string s = "features[" + std::to_string(index) + "] (" + kind;
  for (const char* key : {"label", "ref", "name"}) {
    auto it = props.find(key);
    if (it != props.end() && it->is_string()) {
      s += " '" + it->get<std::string>() + "'";
      break;
    }
  }
  return s + ")";
}

std::uint32_t id_or(const json& props, const char* key, std::uint32_t fallback, const std::string& path) {
  auto it = props.find(key);
  if (it == props.end()) return fallback;
  if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
    fail(path + "." + key, "expected a non-negative integer");
  }
  return it->get<std::uint32_t>();
}

void parse_building(Scenario& s, const json& props, const Geometry& g, const std::string& path) {
  if (g.type != "Polygon") fail(path, "building needs a Polygon");
  geom::Building b;
  b.id = id_or(props, "id", static_cast<std::uint32_t>(s.buildings.size() + 1), path);
  b.label = text_or(props, "label", "B" + std::to_string(b.id), path);
  b.footprint = geom::to_2d(g.vertices);
  b.height = number_or(props, "height", 10.0, path);
  b.known = bool_or(props, "known", true, path);
  if (!(b.height > 0.0)) fail(path + ".height", "must be positive");
  for (const auto& other : s.buildings) {
    if (other.id == b.id) fail(path + ".id", "duplicate building id " + std::to_string(b.id));
  }
  s.buildings.push_back(std::move(b));
}

void parse_artifact(Scenario& s, const json& props, const Geometry& g, const std::string& path) {
  if (g.type != "Point") fail(path, "artifact needs a Point");
  sim::Artifact a;
  a.id = static_cast<std::uint32_t>(s.artifacts.size() + 1);
  std::string role = text_or(props, "role", "", path);
  auto r = msg::parse_role(role);
  if (!r) fail(path + ".role", "unknown role '" + role + "'");
  a.role = *r;
  a.outer_id = id_or(props, "outer_id", a.id, path);
  a.inner_id = id_or(props, "inner_id", 100000 + a.id, path);
  a.position = g.vertices[0];
  a.anchor = a.position;
  a.dynamic = bool_or(props, "dynamic", false, path);
  s.artifacts.push_back(a);
}

void parse_field_node(Scenario& s, const json& props, const Geometry& g, const std::string& path) {
  if (g.type != "Point") fail(path, "field_node needs a Point");
  sim::FieldNode n;
  n.id = id_or(props, "id", static_cast<std::uint32_t>(s.field_nodes.size() + 1), path);
  n.position = g.vertices[0];
  n.radius = number_or(props, "radius", sim::kIedRadius, path);
  std::string effect = text_or(props, "effect", "disable_agent", path);
  if (effect == "disable_agent") {
    n.effect = sim::NodeEffect::disable_agent;
  } else if (effect == "none") {
    n.effect = sim::NodeEffect::none;
  } else {
    fail(path + ".effect", "unknown effect '" + effect + "'");
  }
  auto it = props.find("countered_by");
  if (it != props.end()) {
    if (it->is_null()) {
      n.countered_by.reset();
    } else {
      std::string p = it->is_string() ? it->get<std::string>() : "";
      auto payload = msg::parse_payload(p);
      if (!payload) fail(path + ".countered_by", "unknown payload '" + p + "'");
      n.countered_by = *payload;
    }
  }
  s.field_nodes.push_back(n);
}

void parse_sketch(Scenario& s, const geom::ParamType& type, const json& props, const Geometry& g,
                  const std::string& path) {
  bool point = type.kind == geom::SketchKind::point;
  if (point && g.type != "Point") fail(path, type.type_name + " needs a Point");
  if (!point && g.type == "Point") fail(path, type.type_name + " needs a LineString or Polygon");
  if (!point && type.closed && g.vertices.size() < 3) fail(path, "polygon needs at least 3 vertices");
  SketchSpec sk{type.type_name, g.vertices, text_or(props, "ref", "", path)};
  if (!sk.ref.empty()) {
    for (const auto& other : s.sketches) {
      if (other.ref == sk.ref) fail(path + ".ref", "duplicate ref '" + sk.ref + "'");
    }
  }
  s.sketches.push_back(std::move(sk));
}

void parse_header(Scenario& s, const json& props) {
  const std::string path = "properties";
  if (!props.is_object()) fail(path, "expected an object");
  s.name = text_or(props, "name", "", path);
  if (auto it = props.find("seed"); it != props.end()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) fail(path + ".seed", "expected a non-negative integer");
    s.seed = it->get<std::uint64_t>();
  }
  s.duration_s = number_or(props, "duration_s", s.duration_s, path);
  if (!(s.duration_s >= 0.0)) fail(path + ".duration_s", "must not be negative");

  if (auto it = props.find("bounds"); it != props.end()) {
    std::string bp = path + ".bounds";
    if (!it->is_object()) fail(bp, "expected an object");
    if (it->contains("origin")) s.bounds.origin = position((*it)["origin"], bp + ".origin").xy();
    s.bounds.cell_size = number_or(*it, "cell_size", s.bounds.cell_size, bp);
    s.bounds.width = static_cast<int>(number_or(*it, "width", s.bounds.width, bp));
    s.bounds.height = static_cast<int>(number_or(*it, "height", s.bounds.height, bp));
    if (!(s.bounds.cell_size > 0.0) || s.bounds.width <= 0 || s.bounds.height <= 0) {
      fail(bp, "cell_size, width and height must be positive");
    }
  }

  if (auto it = props.find("network"); it != props.end()) {
    std::string np = path + ".network";
    if (!it->is_object()) fail(np, "expected an object");
    s.network.radio_range_m = number_or(*it, "radio_range_m", s.network.radio_range_m, np);
    s.network.loss_prob = number_or(*it, "loss_prob", s.network.loss_prob, np);
    s.network.hop_latency_s = number_or(*it, "hop_latency_s", s.network.hop_latency_s, np);
    if (auto seed = it->find("seed"); seed != it->end()) {
      if (!seed->is_number_integer() || seed->get<std::int64_t>() < 0) fail(np + ".seed", "expected a non-negative integer");
      s.network.seed = seed->get<std::uint64_t>();
    }
    if (s.network.loss_prob < 0.0 || s.network.loss_prob > 1.0) fail(np + ".loss_prob", "must be in [0, 1]");
    if (!(s.network.radio_range_m > 0.0)) fail(np + ".radio_range_m", "must be positive");
    if (s.network.hop_latency_s < 0.0) fail(np + ".hop_latency_s", "must not be negative");
  }

  if (auto it = props.find("base"); it != props.end()) s.base = position(*it, path + ".base");

  if (auto it = props.find("c2"); it != props.end()) {
    if (!it->is_array()) fail(path + ".c2", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      std::string cp = path + ".c2[" + std::to_string(i) + "]";
      const json& c = (*it)[i];
      if (!c.is_object()) fail(cp, "expected an object");
      C2Spec spec;
      spec.id = id_or(c, "id", 0, cp);
      spec.position = c.contains("position") ? position(c["position"], cp + ".position") : s.base;
      s.c2.push_back(spec);
    }
  }

  if (auto it = props.find("roster"); it != props.end()) {
    if (!it->is_array()) fail(path + ".roster", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      std::string rp = path + ".roster[" + std::to_string(i) + "]";
      const json& r = (*it)[i];
      if (!r.is_object()) fail(rp, "expected an object");
      RosterEntry e;
      std::string platform = text_or(r, "platform", "", rp);
      auto pk = msg::parse_platform(platform);
      if (!pk || *pk == msg::PlatformKind::c2) fail(rp + ".platform", "unknown platform '" + platform + "'");
      e.platform = *pk;
      std::string payload = text_or(r, "payload", "none", rp);
      auto pl = msg::parse_payload(payload);
      if (!pl) fail(rp + ".payload", "unknown payload '" + payload + "'");
      e.payload = *pl;
      double count = number_or(r, "count", 0.0, rp);
      if (count < 0.0 || count != static_cast<int>(count)) fail(rp + ".count", "expected a non-negative integer");
      e.count = static_cast<int>(count);
      e.spawn = r.contains("spawn") ? position(r["spawn"], rp + ".spawn").xy() : s.base.xy();
      e.spacing = number_or(r, "spacing", e.spacing, rp);
      e.fidelity = static_cast<int>(number_or(r, "fidelity", 1.0, rp));
      if (e.fidelity != 1 && e.fidelity != 2) fail(rp + ".fidelity", "must be 1 or 2");
      s.roster.push_back(e);
    }
  }

  if (auto it = props.find("script"); it != props.end()) {
    if (!it->is_array()) fail(path + ".script", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      std::string sp = path + ".script[" + std::to_string(i) + "]";
      const json& step = (*it)[i];
      if (!step.is_object() || !step.contains("command") || !step["command"].is_object()) {
        fail(sp, "expected {\"at\": seconds, \"command\": {...}}");
      }
      double at = number_or(step, "at", 0.0, sp);
      if (at < 0.0) fail(sp + ".at", "must not be negative");
      s.script.push_back({at, step["command"]});
    }
  }
}

}  // namespace

std::size_t Scenario::agent_count() const {
  std::size_t n = 0;
  for (const auto& r : roster) n += static_cast<std::size_t>(r.count);
  return n;
}

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) fail("$", "expected a FeatureCollection object");
  if (text_or(doc, "type", "FeatureCollection", "$") != "FeatureCollection") fail("type", "expected FeatureCollection");
  Scenario s;
  if (auto it = doc.find("properties"); it != doc.end()) parse_header(s, *it);

  auto types = geom::ParamTypeRegistry::with_builtins();
  if (auto it = doc.find("features"); it != doc.end()) {
    if (!it->is_array()) fail("features", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& f = (*it)[i];
      std::string base = "features[" + std::to_string(i) + "]";
      if (!f.is_object()) fail(base, "expected a Feature object");
      auto pit = f.find("properties");
      if (pit == f.end() || !pit->is_object()) fail(base, "missing properties");
      std::string kind = text_or(*pit, "kind", "", base + ".properties");
      if (kind.empty()) fail(base + ".properties.kind", "missing");
      std::string path = describe(kind, *pit, i);
      Geometry g = geometry(f, path);
      if (kind == "building") {
        parse_building(s, *pit, g, path);
      } else if (kind == "artifact") {
        parse_artifact(s, *pit, g, path);
      } else if (kind == "field_node") {
        parse_field_node(s, *pit, g, path);
      } else if (const auto* type = types.find(kind)) {
        parse_sketch(s, *type, *pit, g, path);
      } else {
        fail(path + ".properties.kind", "unknown kind '" + kind + "'");
      }
    }
  }

  if (s.c2.empty()) s.c2.push_back({0, s.base});
  std::set<AgentId> c2_ids;
  for (std::size_t i = 0; i < s.c2.size(); ++i) {
    if (s.c2[i].id == 0) s.c2[i].id = 60001 + static_cast<AgentId>(i);
    if (!c2_ids.insert(s.c2[i].id).second) fail("properties.c2", "duplicate c2 id " + std::to_string(s.c2[i].id));
  }
  return s;
}

Scenario parse_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("$: not valid JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario load_scenario(const std::string& path) {
  std::string text = read_text_file(path);
  try {
    return parse_scenario_text(text);
  } catch (const ScenarioError& e) {
    throw ScenarioError(path + ": " + e.what());
  }
}

plan::LayerMask no_go_layers(const std::string& type_name) {
  using plan::Layer;
  using plan::layer_bit;
  if (type_name == "curb") return layer_bit(Layer::ground);
  if (type_name == "wall") return layer_bit(Layer::ground) | layer_bit(Layer::low_air);
  if (type_name == "powerline") return layer_bit(Layer::low_air);
  return plan::kAllLayers;
}

}  // namespace swarm::server
