#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "swarm/geom/sketch.hpp"
#include "swarm/msg/agent_table.hpp"
#include "swarm/msg/data_store.hpp"
#include "swarm/server/scenario.hpp"
#include "swarm/tactics/definition.hpp"

namespace swarm::server {

struct IntelMessage {
  double time = 0.0;
  int priority = 0;  // 0 most urgent
  std::string text;
  std::uint32_t outer_id = 0;
  Vec3 position{};
};

/// Lower is more urgent: HVT, hostile, IED, intel, other devices, medic,
/// person, building label, benign.
int intel_priority(msg::ArtifactRole role);

struct TacticView {
  msg::InstanceId id = 0;
  std::string definition;
  std::string status;
  std::optional<std::string> error;
  std::vector<msg::JobId> children;  // jobs
  std::vector<msg::InstanceId> parents;
};

/// Operator-side state of one C2 instance: everything it knows arrives over
/// the mesh. Console commands are turned into tactic requests and sketch
/// updates; names ("refs") chosen by the operator resolve once the server
/// replies, and commands naming an unresolved ref wait in order.
class C2Node {
 public:
  C2Node(C2Spec spec, const std::vector<SketchSpec>& initial_sketches);

  AgentId id() const { return spec_.id; }
  Vec3 position() const { return spec_.position; }

  /// Queues a console command; see console.hpp for the accepted forms.
  void command(const nlohmann::json& cmd);
  void on_message(const msg::AnyMessage& m, double now);
  /// Frames for every queued command that can go out now, in order.
  std::vector<wire::Bytes> flush(double now);
  msg::Heartbeat heartbeat() const;

  const msg::AgentTable& agents() const { return agents_; }
  const msg::DataStore& store() const { return store_; }
  const geom::SketchDatabase& sketches() const { return sketches_; }
  const std::map<msg::InstanceId, TacticView>& tactics() const { return tactics_; }
  const std::vector<tactics::TacticDefinition>& definitions() const { return defs_; }
  bool has_definitions() const { return have_defs_; }
  const geom::SelectionGroup& selection() const { return selection_; }
  const std::vector<IntelMessage>& intel() const { return intel_; }
  /// Rejected commands and requests, oldest first.
  const std::vector<std::string>& errors() const { return errors_; }
  std::size_t queued() const { return queue_.size(); }
  std::optional<msg::InstanceId> instance_ref(const std::string& ref) const;
  std::optional<geom::SketchId> sketch_ref(const std::string& ref) const;
  std::uint64_t last_request_id() const { return next_request_ - 1; }

 private:
  enum class RefState { pending, resolved, failed };
  struct Ref {
    RefState state = RefState::pending;
    std::uint64_t id = 0;
  };
  enum class Resolve { ready, wait, fail };

  Resolve resolve(const nlohmann::json& target, std::map<std::string, Ref>& refs, std::uint64_t& out,
                  std::string& error) const;
  /// nullopt: wait. Empty frame: handled locally or dropped.
  std::optional<wire::Bytes> translate(const nlohmann::json& cmd);
  void reject(std::string what);
  void apply_sketch(const msg::SketchUpdate& u);
  void apply_status(const msg::TacticStatus& s);
  void apply_detection(const msg::Detection& d, double now);

  C2Spec spec_;
  std::deque<nlohmann::json> queue_;
  std::uint64_t next_request_ = 1;
  std::map<std::string, Ref> instance_refs_;
  std::map<std::string, Ref> sketch_refs_;
  std::map<std::uint64_t, std::string> awaiting_instance_;
  std::map<std::uint64_t, std::string> awaiting_sketch_;
  std::map<std::uint64_t, std::pair<msg::InstanceId, msg::InstanceId>> awaiting_link_;  // request -> (parent, child)
  std::map<std::uint64_t, std::pair<msg::InstanceId, msg::InstanceId>> awaiting_unlink_;

  msg::AgentTable agents_;
  msg::DataStore store_;
  geom::SketchDatabase sketches_;
  std::map<msg::InstanceId, TacticView> tactics_;
  std::vector<tactics::TacticDefinition> defs_;
  bool have_defs_ = false;
  geom::SelectionGroup selection_;
  std::vector<IntelMessage> intel_;
  std::vector<std::string> errors_;
};

}  // namespace swarm::server
