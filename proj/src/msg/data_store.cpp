#include "swarm/msg/data_store.hpp"

#include <algorithm>

namespace swarm::msg {

IngestResult DataStore::ingest_detection(const Detection& d) {
  ++reports_;
  IngestResult r;
  const bool identifies = d.inner_id.has_value();
  auto [it, inserted] = entries_.try_emplace(d.outer_id);
  ArtifactEntry& e = it->second;
  if (inserted) {
    e.outer_id = d.outer_id;
    e.first_seen = d.timestamp;
    r.new_entry = true;
    r.changed = true;
  }

  auto rec = std::find_if(e.reporters.begin(), e.reporters.end(), [&](const ReporterRecord& x) {
    return x.reporter == d.reporter && x.identified == identifies;
  });
  if (rec == e.reporters.end()) {
    e.reporters.push_back({d.reporter, identifies, d.timestamp});
    r.changed = true;
  } else if (d.timestamp > rec->timestamp) {
    rec->timestamp = d.timestamp;
  }

  if (identifies) {
    if (!e.identified) r.upgraded = !inserted;
    if (!e.identified || e.role != d.role || e.inner_id != d.inner_id) r.changed = true;
    e.identified = true;
    e.inner_id = d.inner_id;
    e.role = d.role;
    e.position = d.position;
  } else if (!e.identified) {
    if (e.role != d.role) r.changed = true;
    e.role = d.role;
    e.position = d.position;
  }
  e.last_update = std::max(e.last_update, d.timestamp);
  return r;
}

const ArtifactEntry* DataStore::find(std::uint32_t outer_id) const {
  auto it = entries_.find(outer_id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t DataStore::identified_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const auto& kv) { return kv.second.identified; }));
}

}  // namespace swarm::msg
