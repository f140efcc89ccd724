#include "swarm/msg/agent_table.hpp"

namespace swarm::msg {

bool AgentTable::ingest_heartbeat(const Heartbeat& hb, double now) {
  auto [it, inserted] = agents_.try_emplace(hb.agent_id);
  if (inserted) it->second.first_seen = now;
  it->second.last = hb;
  if (now > it->second.last_seen || inserted) it->second.last_seen = now;
  return inserted;
}

bool AgentTable::ingest_fields(const wire::FieldList& fields, double now) {
  Heartbeat hb;
  try {
    hb = from_fields<Heartbeat>(fields);
  } catch (const std::exception&) {
    ++malformed_;
    return false;
  }
  return ingest_heartbeat(hb, now);
}

const AgentEntry* AgentTable::find(AgentId id) const {
  auto it = agents_.find(id);
  return it == agents_.end() ? nullptr : &it->second;
}

bool AgentTable::is_stale(AgentId id, double now) const {
  const auto* e = find(id);
  return e == nullptr || now - e->last_seen > kStaleAfterS;
}

std::optional<DisplayStatus> AgentTable::display_status(AgentId id, double now) const {
  const auto* e = find(id);
  if (e == nullptr) return std::nullopt;
  if (now - e->last_seen > kStaleAfterS) return DisplayStatus::unknown;
  return display_of(e->last.status);
}

std::vector<AgentId> AgentTable::fresh_agents(double now) const {
  std::vector<AgentId> out;
  for (const auto& [id, e] : agents_)
    if (now - e.last_seen <= kStaleAfterS) out.push_back(id);
  return out;
}

DisplayStatus display_of(AgentStatus s) {
  switch (s) {
    case AgentStatus::idle: return DisplayStatus::idle;
    case AgentStatus::tasked: return DisplayStatus::tasked;
    case AgentStatus::killed: return DisplayStatus::killed;
    case AgentStatus::disabled: return DisplayStatus::disabled;
  }
  return DisplayStatus::unknown;
}

std::string_view status_color(DisplayStatus s) {
  switch (s) {
    case DisplayStatus::idle: return "green";
    case DisplayStatus::killed: return "orange";
    case DisplayStatus::disabled: return "red";
    case DisplayStatus::tasked: return "blue";
    case DisplayStatus::unknown: return "orange";
  }
  return "orange";
}

}  // namespace swarm::msg
