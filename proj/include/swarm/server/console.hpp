#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "swarm/geom/geometry.hpp"
#include "swarm/msg/messages.hpp"

namespace swarm::server {

/// Console JSON API, client to server. Every command is an object with a
/// "type":
///
///   invoke          tactic, position [x,y(,z)], params {}, selection [ids] or
///                   use_selection true, deferred, ref
///   sketch_create   sketch_type, vertices [[x,y],...], ref
///   sketch_modify   sketch (id or ref), vertices
///   sketch_delete   sketch
///   link_add        parent, child (instance id or ref)
///   link_remove     parent, child
///   issue           instance
///   cancel          instance
///   lasso           vertices (stroke; toggles the agents inside)
///   clear_selection
///   estop
///   spawn           platform, payload, count, position, spacing
///   fidelity        agent (id or "all"), level, config_hash
///
/// Server to client: {"type":"snapshot", ...} once per tick, {"type":"hello"}
/// with the tactic palette on connect, {"type":"error","message":...} for
/// rejected commands.
class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape check only; refs are resolved later. Throws CommandError.
void validate_command(const nlohmann::json& cmd);
/// Commands handled by the operator's C2 instance (the rest act on the
/// simulation directly: estop, spawn, fidelity).
bool is_c2_command(std::string_view type);

geom::Vec3 vec3_from_json(const nlohmann::json& j, const std::string& path);
std::vector<geom::Vec3> vertices_from_json(const nlohmann::json& j, const std::string& path);
nlohmann::json to_json(geom::Vec3 v);
nlohmann::json to_json(const wire::Value& v);
/// Integers stay integers, other numbers become reals.
msg::ParamList params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const msg::ParamList& params);

}  // namespace swarm::server
