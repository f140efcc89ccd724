#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "swarm/msg/messages.hpp"

namespace swarm::msg {

/// A heartbeat older than this marks the agent unknown (strictly greater).
inline constexpr double kStaleAfterS = 7.0;

struct AgentEntry {
  Heartbeat last;
  double first_seen = 0.0;
  double last_seen = 0.0;
};

/// Discovered agents keyed by id. Entries are never removed.
class AgentTable {
 public:
  /// Returns true when the agent is new.
  bool ingest_heartbeat(const Heartbeat& hb, double now);
  /// Decodes and ingests; malformed heartbeats are dropped and counted.
  bool ingest_fields(const wire::FieldList& fields, double now);

  const AgentEntry* find(AgentId id) const;
  bool contains(AgentId id) const { return agents_.contains(id); }
  std::size_t size() const { return agents_.size(); }
  const std::map<AgentId, AgentEntry>& entries() const { return agents_; }

  bool is_stale(AgentId id, double now) const;
  /// nullopt for an agent never heard from.
  std::optional<DisplayStatus> display_status(AgentId id, double now) const;
  /// Agents whose heartbeat is fresh at `now`, in id order.
  std::vector<AgentId> fresh_agents(double now) const;

  std::uint64_t malformed() const { return malformed_; }

 private:
  std::map<AgentId, AgentEntry> agents_;
  std::uint64_t malformed_ = 0;
};

DisplayStatus display_of(AgentStatus s);
/// Operator colour scheme: idle green, killed orange, disabled red, tasked
/// blue, unknown orange.
std::string_view status_color(DisplayStatus s);

}  // namespace swarm::msg
