#include "swarm/server/console.hpp"

#include <cmath>
#include <set>

namespace swarm::server {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw CommandError(what); }

// Parsed text gives unsigned for non-negative literals; json built in code
// gives signed. Accept both.
bool non_negative_integer(const json& j) {
  return j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0);
}

void require(const json& cmd, const char* key, const std::string& type) {
  if (!cmd.contains(key)) bad(type + ": missing '" + key + "'");
}

void require_target(const json& cmd, const char* key, const std::string& type) {
  require(cmd, key, type);
  const json& t = cmd[key];
  bool ok = (t.is_string() && !t.get<std::string>().empty()) || t.is_number_unsigned() ||
            (t.is_number_integer() && t.get<std::int64_t>() > 0);
  if (!ok) bad(type + ": '" + key + "' must be a positive id or a ref name");
}

void optional_string(const json& cmd, const char* key, const std::string& type) {
  if (cmd.contains(key) && !cmd[key].is_string()) bad(type + ": '" + key + "' must be a string");
}

void optional_bool(const json& cmd, const char* key, const std::string& type) {
  if (cmd.contains(key) && !cmd[key].is_boolean()) bad(type + ": '" + key + "' must be a boolean");
}

}  // namespace

geom::Vec3 vec3_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() < 2 || j.size() > 3) bad(path + ": expected [x, y] or [x, y, z]");
  geom::Vec3 v;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) bad(path + ": coordinates must be numbers");
    double d = j[i].get<double>();
    if (!std::isfinite(d)) bad(path + ": coordinates must be finite");
    (i == 0 ? v.x : i == 1 ? v.y : v.z) = d;
  }
  return v;
}

std::vector<geom::Vec3> vertices_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path + ": expected an array of points");
  std::vector<geom::Vec3> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(vec3_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

json to_json(geom::Vec3 v) { return json::array({v.x, v.y, v.z}); }

json to_json(const wire::Value& v) {
  switch (v.kind()) {
    case wire::ValueKind::nil: return nullptr;
    case wire::ValueKind::boolean: return v.as_bool();
    case wire::ValueKind::integer: return v.as_int();
    case wire::ValueKind::unsigned_integer: return v.as_uint();
    case wire::ValueKind::real: return v.as_real();
    case wire::ValueKind::text: return v.as_text();
    case wire::ValueKind::binary: return json::binary(v.as_binary());
    case wire::ValueKind::array: {
      json a = json::array();
      for (const auto& e : v.as_array()) a.push_back(to_json(e));
      return a;
    }
  }
  return nullptr;
}

msg::ParamList params_from_json(const json& j) {
  if (!j.is_object()) bad("params must be an object");
  msg::ParamList out;
  for (const auto& [k, v] : j.items()) {
    if (v.is_boolean()) {
      out.emplace_back(k, v.get<bool>());
    } else if (v.is_number_unsigned()) {
      out.emplace_back(k, static_cast<std::int64_t>(v.get<std::uint64_t>()));
    } else if (v.is_number_integer()) {
      out.emplace_back(k, v.get<std::int64_t>());
    } else if (v.is_number()) {
      out.emplace_back(k, v.get<double>());
    } else if (v.is_string()) {
      out.emplace_back(k, v.get<std::string>());
    } else {
      bad("param '" + k + "' must be a number, boolean or string");
    }
  }
  return out;
}

json to_json(const msg::ParamList& params) {
  json o = json::object();
  for (const auto& [k, v] : params) o[k] = to_json(v);
  return o;
}

bool is_c2_command(std::string_view type) {
  return type != "estop" && type != "spawn" && type != "fidelity";
}

void validate_command(const json& cmd) {
  if (!cmd.is_object()) bad("command must be a JSON object");
  if (!cmd.contains("type") || !cmd["type"].is_string()) bad("command needs a string 'type'");
  std::string type = cmd["type"].get<std::string>();
  if (type == "invoke") {
    require(cmd, "tactic", type);
    if (!cmd["tactic"].is_string()) bad("invoke: 'tactic' must be a string");
    require(cmd, "position", type);
    vec3_from_json(cmd["position"], "invoke.position");
    if (cmd.contains("params")) params_from_json(cmd["params"]);
    if (cmd.contains("selection")) {
      if (!cmd["selection"].is_array()) bad("invoke: 'selection' must be an array of agent ids");
      for (const auto& a : cmd["selection"]) {
        if (!non_negative_integer(a)) bad("invoke: 'selection' must be an array of agent ids");
      }
    }
    optional_bool(cmd, "use_selection", type);
    optional_bool(cmd, "deferred", type);
    optional_string(cmd, "ref", type);
  } else if (type == "sketch_create") {
    require(cmd, "sketch_type", type);
    if (!cmd["sketch_type"].is_string()) bad("sketch_create: 'sketch_type' must be a string");
    require(cmd, "vertices", type);
    if (vertices_from_json(cmd["vertices"], "sketch_create.vertices").empty()) bad("sketch_create: no vertices");
    optional_string(cmd, "ref", type);
  } else if (type == "sketch_modify") {
    require_target(cmd, "sketch", type);
    require(cmd, "vertices", type);
    if (vertices_from_json(cmd["vertices"], "sketch_modify.vertices").empty()) bad("sketch_modify: no vertices");
  } else if (type == "sketch_delete") {
    require_target(cmd, "sketch", type);
  } else if (type == "link_add" || type == "link_remove") {
    require_target(cmd, "parent", type);
    require_target(cmd, "child", type);
  } else if (type == "issue" || type == "cancel") {
    require_target(cmd, "instance", type);
  } else if (type == "lasso") {
    require(cmd, "vertices", type);
    vertices_from_json(cmd["vertices"], "lasso.vertices");
  } else if (type == "clear_selection" || type == "estop") {
  } else if (type == "spawn") {
    require(cmd, "platform", type);
    if (!cmd["platform"].is_string()) bad("spawn: 'platform' must be a string");
    optional_string(cmd, "payload", type);
    require(cmd, "count", type);
    if (!non_negative_integer(cmd["count"]) || cmd["count"].get<std::int64_t>() > 10000) {
      bad("spawn: 'count' must be an integer in [0, 10000]");
    }
    require(cmd, "position", type);
    vec3_from_json(cmd["position"], "spawn.position");
    if (cmd.contains("spacing") && !cmd["spacing"].is_number()) bad("spawn: 'spacing' must be a number");
  } else if (type == "fidelity") {
    require(cmd, "agent", type);
    const json& a = cmd["agent"];
    if (!(non_negative_integer(a) || (a.is_string() && a.get<std::string>() == "all"))) {
      bad("fidelity: 'agent' must be an agent id or \"all\"");
    }
    require(cmd, "level", type);
    if (!cmd["level"].is_number_integer()) bad("fidelity: 'level' must be an integer");
    if (cmd.contains("config_hash") && !non_negative_integer(cmd["config_hash"])) {
      bad("fidelity: 'config_hash' must be a non-negative integer");
    }
  } else {
    bad("unknown command type '" + type + "'");
  }
}

}  // namespace swarm::server
