#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "swarm/msg/messages.hpp"

namespace swarm::msg {

struct ReporterRecord {
  AgentId reporter = 0;
  bool identified = false;  // report carried the inner tag
  double timestamp = 0.0;
};

/// One artifact as known to C2.
struct ArtifactEntry {
  std::uint32_t outer_id = 0;
  std::optional<std::uint32_t> inner_id;
  ArtifactRole role = ArtifactRole::person;
  bool identified = false;
  geom::Vec3 position{};
  double first_seen = 0.0;
  double last_update = 0.0;
  std::vector<ReporterRecord> reporters;
};

struct IngestResult {
  bool new_entry = false;
  bool upgraded = false;  // recognized -> identified
  bool changed = false;
};

/// Central intel store keyed by outer tag id. Append-only: entries are never
/// removed and an identified artifact is never downgraded.
class DataStore {
 public:
  IngestResult ingest_detection(const Detection& d);

  const ArtifactEntry* find(std::uint32_t outer_id) const;
  const std::map<std::uint32_t, ArtifactEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t identified_count() const;
  std::uint64_t reports() const { return reports_; }

 private:
  std::map<std::uint32_t, ArtifactEntry> entries_;
  std::uint64_t reports_ = 0;
};

}  // namespace swarm::msg
