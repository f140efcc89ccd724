#include "swarm/server/c2.hpp"

#include <algorithm>
#include <cstdio>

#include <spdlog/spdlog.h>

#include "swarm/server/console.hpp"

namespace swarm::server {

using nlohmann::json;
using msg::ArtifactRole;

int intel_priority(ArtifactRole role) {
  switch (role) {
    case ArtifactRole::hvt: return 0;
    case ArtifactRole::hostile: return 1;
    case ArtifactRole::ied: return 2;
    case ArtifactRole::intel: return 3;
    case ArtifactRole::device: return 4;
    case ArtifactRole::medic: return 5;
    case ArtifactRole::person: return 6;
    case ArtifactRole::building_label: return 7;
    case ArtifactRole::benign: return 8;
  }
  return 8;
}

C2Node::C2Node(C2Spec spec, const std::vector<SketchSpec>& initial_sketches) : spec_(spec) {
  // The server creates scenario sketches first, so their ids are known.
  for (std::size_t i = 0; i < initial_sketches.size(); ++i) {
    if (!initial_sketches[i].ref.empty()) {
      sketch_refs_[initial_sketches[i].ref] = Ref{RefState::resolved, i + 1};
    }
  }
}

void C2Node::command(const json& cmd) { queue_.push_back(cmd); }

void C2Node::reject(std::string what) {
  spdlog::debug("c2 {}: {}", spec_.id, what);
  errors_.push_back(std::move(what));
}

std::optional<msg::InstanceId> C2Node::instance_ref(const std::string& ref) const {
  auto it = instance_refs_.find(ref);
  if (it == instance_refs_.end() || it->second.state != RefState::resolved) return std::nullopt;
  return it->second.id;
}

std::optional<geom::SketchId> C2Node::sketch_ref(const std::string& ref) const {
  auto it = sketch_refs_.find(ref);
  if (it == sketch_refs_.end() || it->second.state != RefState::resolved) return std::nullopt;
  return it->second.id;
}

C2Node::Resolve C2Node::resolve(const json& target, std::map<std::string, Ref>& refs, std::uint64_t& out,
                                std::string& error) const {
  if (target.is_number()) {
    out = target.get<std::uint64_t>();
    return Resolve::ready;
  }
  std::string name = target.get<std::string>();
  auto it = refs.find(name);
  if (it == refs.end()) {
    error = "unknown ref '" + name + "'";
    return Resolve::fail;
  }
  if (it->second.state == RefState::pending) return Resolve::wait;
  if (it->second.state == RefState::failed) {
    error = "ref '" + name + "' was rejected";
    return Resolve::fail;
  }
  out = it->second.id;
  return Resolve::ready;
}

std::optional<wire::Bytes> C2Node::translate(const json& cmd) {
  const std::string type = cmd["type"].get<std::string>();
  std::string error;
  auto claim_ref = [&](std::map<std::string, Ref>& refs, std::map<std::uint64_t, std::string>& awaiting,
                       std::uint64_t request) {
    if (!cmd.contains("ref")) return true;
    std::string ref = cmd["ref"].get<std::string>();
    if (refs.contains(ref)) {
      reject(type + ": ref '" + ref + "' already used");
      return false;
    }
    refs[ref] = Ref{};
    awaiting[request] = ref;
    return true;
  };

  if (type == "lasso") {
    std::map<geom::AgentKey, Vec2> positions;
    for (const auto& [id, e] : agents_.entries()) positions[id] = e.last.position.xy();
    selection_ = geom::lasso_update(selection_, geom::to_2d(vertices_from_json(cmd["vertices"], "lasso.vertices")),
                                    positions);
    return wire::Bytes{};
  }
  if (type == "clear_selection") {
    selection_.clear();
    return wire::Bytes{};
  }

  if (type.rfind("sketch_", 0) == 0) {
    msg::SketchUpdate u;
    u.c2_id = spec_.id;
    if (type == "sketch_create") {
      u.op = "create";
      u.type_name = cmd["sketch_type"].get<std::string>();
      u.vertices = vertices_from_json(cmd["vertices"], "sketch_create.vertices");
    } else {
      std::uint64_t id = 0;
      switch (resolve(cmd["sketch"], sketch_refs_, id, error)) {
        case Resolve::wait: return std::nullopt;
        case Resolve::fail: reject(type + ": " + error); return wire::Bytes{};
        case Resolve::ready: break;
      }
      u.sketch_id = id;
      if (const auto* s = sketches_.find(id)) u.type_name = geom::sketch_type(*s);
      if (type == "sketch_modify") {
        u.op = "modify";
        u.vertices = vertices_from_json(cmd["vertices"], "sketch_modify.vertices");
      } else {
        u.op = "delete";
      }
    }
    u.request_id = next_request_;
    if (u.op == "create" && !claim_ref(sketch_refs_, awaiting_sketch_, u.request_id)) return wire::Bytes{};
    ++next_request_;
    return msg::encode(u);
  }

  msg::TacticRequest r;
  r.c2_id = spec_.id;
  if (type == "invoke") {
    r.op = "invoke";
    r.definition = cmd["tactic"].get<std::string>();
    r.position = vec3_from_json(cmd["position"], "invoke.position");
    if (cmd.contains("params")) r.params = params_from_json(cmd["params"]);
    if (cmd.contains("selection")) {
      r.selection = cmd["selection"].get<std::vector<AgentId>>();
    } else if (cmd.value("use_selection", false)) {
      r.selection = std::vector<AgentId>(selection_.begin(), selection_.end());
    }
    r.deferred = cmd.value("deferred", false);
    r.request_id = next_request_;
    if (!claim_ref(instance_refs_, awaiting_instance_, r.request_id)) return wire::Bytes{};
  } else {
    auto target = [&](const char* key, std::optional<msg::InstanceId>& slot) {
      std::uint64_t id = 0;
      Resolve res = resolve(cmd[key], instance_refs_, id, error);
      if (res == Resolve::ready) slot = id;
      return res;
    };
    Resolve a = Resolve::ready;
    Resolve b = Resolve::ready;
    if (type == "link_add" || type == "link_remove") {
      r.op = type == "link_add" ? "link" : "unlink";
      a = target("parent", r.ref_a);
      b = target("child", r.ref_b);
    } else {
      r.op = type;  // issue, cancel
      a = target("instance", r.ref_a);
    }
    if (a == Resolve::fail || b == Resolve::fail) {
      reject(type + ": " + error);
      return wire::Bytes{};
    }
    if (a == Resolve::wait || b == Resolve::wait) return std::nullopt;
    r.request_id = next_request_;
    if (r.op == "link") awaiting_link_[r.request_id] = {*r.ref_a, *r.ref_b};
    if (r.op == "unlink") awaiting_unlink_[r.request_id] = {*r.ref_a, *r.ref_b};
  }
  ++next_request_;
  return msg::encode(r);
}

std::vector<wire::Bytes> C2Node::flush(double) {
  std::vector<wire::Bytes> out;
  while (!queue_.empty()) {
    std::optional<wire::Bytes> frame;
    try {
      frame = translate(queue_.front());
    } catch (const std::exception& e) {
      reject(e.what());
      frame = wire::Bytes{};
    }
    if (!frame) break;  // waits for a ref; later commands keep their order
    if (!frame->empty()) out.push_back(std::move(*frame));
    queue_.pop_front();
  }
  return out;
}

msg::Heartbeat C2Node::heartbeat() const {
  msg::Heartbeat hb;
  hb.agent_id = spec_.id;
  hb.platform = msg::PlatformKind::c2;
  hb.position = spec_.position;
  return hb;
}

void C2Node::apply_sketch(const msg::SketchUpdate& u) {
  bool mine = u.c2_id == spec_.id && u.request_id != 0;
  std::string ref;
  if (mine) {
    if (auto it = awaiting_sketch_.find(u.request_id); it != awaiting_sketch_.end()) {
      ref = it->second;
      awaiting_sketch_.erase(it);
    }
  }
  if (u.op == "rejected") {
    if (!ref.empty()) sketch_refs_[ref].state = RefState::failed;
    if (mine) reject("sketch request " + std::to_string(u.request_id) + " rejected");
    return;
  }
  if (!u.sketch_id) return;
  try {
    if (u.op == "create" || u.op == "modify") {
      sketches_.remove(*u.sketch_id);
      sketches_.put(*u.sketch_id, u.type_name, u.vertices);
    } else if (u.op == "delete") {
      sketches_.remove(*u.sketch_id);
    }
  } catch (const std::exception& e) {
    reject(std::string("sketch mirror: ") + e.what());
  }
  if (!ref.empty()) sketch_refs_[ref] = Ref{RefState::resolved, *u.sketch_id};
}

void C2Node::apply_status(const msg::TacticStatus& s) {
  bool mine = s.c2_id == spec_.id && s.request_id != 0;
  bool failed = s.status == "error";
  if (mine) {
    if (auto it = awaiting_instance_.find(s.request_id); it != awaiting_instance_.end()) {
      Ref& ref = instance_refs_[it->second];
      if (failed || !s.instance_id) {
        ref.state = RefState::failed;
      } else {
        ref = Ref{RefState::resolved, *s.instance_id};
      }
      awaiting_instance_.erase(it);
    }
    if (auto it = awaiting_link_.find(s.request_id); it != awaiting_link_.end()) {
      if (!failed) {
        auto& parents = tactics_[it->second.second].parents;
        if (std::find(parents.begin(), parents.end(), it->second.first) == parents.end()) {
          parents.push_back(it->second.first);
        }
      }
      awaiting_link_.erase(it);
    }
    if (auto it = awaiting_unlink_.find(s.request_id); it != awaiting_unlink_.end()) {
      if (!failed) std::erase(tactics_[it->second.second].parents, it->second.first);
      awaiting_unlink_.erase(it);
    }
    if (failed) reject("request " + std::to_string(s.request_id) + ": " + s.error.value_or("error"));
  }
  if (failed || !s.instance_id) return;
  TacticView& v = tactics_[*s.instance_id];
  v.id = *s.instance_id;
  v.definition = s.definition;
  v.status = s.status;
  v.error = s.error;
  v.children = s.children;
}

void C2Node::apply_detection(const msg::Detection& d, double now) {
  msg::IngestResult r = store_.ingest_detection(d);
  if (!r.new_entry && !r.upgraded) return;
  const msg::ArtifactEntry* e = store_.find(d.outer_id);
  char where[64];
  std::snprintf(where, sizeof where, "(%.0f, %.0f)", e->position.x, e->position.y);
  std::string text = std::string(msg::to_string(e->role)) + (e->identified ? " identified at " : " detected at ") +
                     where + " by agent " + std::to_string(d.reporter);
  intel_.push_back({now, intel_priority(e->role), std::move(text), e->outer_id, e->position});
}

void C2Node::on_message(const msg::AnyMessage& m, double now) {
  if (const auto* hb = std::get_if<msg::Heartbeat>(&m)) {
    if (hb->platform != msg::PlatformKind::c2) agents_.ingest_heartbeat(*hb, now);
  } else if (const auto* d = std::get_if<msg::Detection>(&m)) {
    apply_detection(*d, now);
  } else if (const auto* s = std::get_if<msg::TacticStatus>(&m)) {
    apply_status(*s);
  } else if (const auto* u = std::get_if<msg::SketchUpdate>(&m)) {
    apply_sketch(*u);
  } else if (const auto* defs = std::get_if<msg::TacticDefs>(&m)) {
    if (defs->c2_id != 0 && defs->c2_id != spec_.id) return;
    try {
      auto decoded = tactics::decode_definitions(defs->definitions);
      defs_ = std::move(decoded.tactics);
      have_defs_ = true;
    } catch (const std::exception& e) {
      reject(std::string("tactic definitions: ") + e.what());
    }
  }
}

}  // namespace swarm::server
