#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "swarm/geom/geometry.hpp"
#include "swarm/msg/types.hpp"
#include "swarm/wire/codec.hpp"

namespace swarm::msg {

using Param = std::pair<std::string, wire::Value>;
using ParamList = std::vector<Param>;

/// Agent status beacon; C2 instances send the same record on "/heartbeat".
struct Heartbeat {
  static constexpr std::string_view kTopic = "/a2c/heartbeat";
  static constexpr std::string_view kC2Topic = "/heartbeat";

  AgentId agent_id = 0;
  PlatformKind platform = PlatformKind::quad;
  geom::Vec3 position{};
  double battery = 1.0;
  AgentStatus status = AgentStatus::idle;
  std::optional<JobId> task_id;
  PayloadKind payload = PayloadKind::none;
  std::uint8_t fidelity = 1;
  std::uint32_t config_hash = 0;

  friend bool operator==(const Heartbeat&, const Heartbeat&) = default;
};

struct Job {
  static constexpr std::string_view kTopic = "/bidding";

  JobId job_id = 0;
  InstanceId tactic_id = 0;
  std::string primitive;
  std::vector<geom::Vec3> waypoints;
  ParamList params;
  // Eligibility filter; an empty list accepts everything.
  std::vector<PlatformKind> platforms;
  std::vector<PayloadKind> payloads;
  std::vector<AgentId> selection;

  const wire::Value* param(std::string_view name) const;
  double param_real(std::string_view name, double fallback) const;

  friend bool operator==(const Job&, const Job&) = default;
};

struct Bid {
  static constexpr std::string_view kTopic = "/bids";

  JobId job_id = 0;
  AgentId agent_id = 0;
  std::optional<double> value;  // nullopt = decline

  friend bool operator==(const Bid&, const Bid&) = default;
};

struct Cmd {
  static constexpr std::string_view kTopic = "/command";

  std::vector<std::pair<JobId, AgentId>> assignments;
  std::vector<JobId> cancellations;

  friend bool operator==(const Cmd&, const Cmd&) = default;
};

struct Detection {
  static constexpr std::string_view kTopic = "/detections";

  AgentId reporter = 0;
  std::uint32_t outer_id = 0;
  std::optional<std::uint32_t> inner_id;
  ArtifactRole role = ArtifactRole::person;
  geom::Vec3 position{};
  double timestamp = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct GridOverlay {
  static constexpr std::string_view kTopic = "/grid";

  std::string name;
  geom::Vec2 origin{};
  double cell_size = 1.0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<double> values;  // row-major, width*height

  friend bool operator==(const GridOverlay&, const GridOverlay&) = default;
};

struct TaskResult {
  static constexpr std::string_view kTopic = "/task_result";

  JobId job_id = 0;
  AgentId agent_id = 0;
  TaskOutcome outcome = TaskOutcome::succeeded;

  friend bool operator==(const TaskResult&, const TaskResult&) = default;
};

/// Full tactic definition set, addressed to one C2 instance (0 = all).
struct TacticDefs {
  static constexpr std::string_view kTopic = "/tactic_defs";

  AgentId c2_id = 0;
  wire::Array definitions;

  friend bool operator==(const TacticDefs&, const TacticDefs&) = default;
};

/// Operator request from a C2 instance. `op` is one of invoke, link,
/// unlink, cancel, issue; ref_a/ref_b name instances for the chain ops.
struct TacticRequest {
  static constexpr std::string_view kTopic = "/tactic_invoke";

  std::uint64_t request_id = 0;
  AgentId c2_id = 0;
  std::string op;
  std::string definition;
  geom::Vec3 position{};
  ParamList params;
  std::optional<std::vector<AgentId>> selection;
  std::optional<InstanceId> ref_a;
  std::optional<InstanceId> ref_b;
  bool deferred = false;  // invoke without issuing; released later by "issue"

  friend bool operator==(const TacticRequest&, const TacticRequest&) = default;
};

struct TacticStatus {
  static constexpr std::string_view kTopic = "/tactic_status";

  std::uint64_t request_id = 0;  // 0 for unsolicited transitions
  AgentId c2_id = 0;
  std::optional<InstanceId> instance_id;
  std::string definition;
  std::string status;
  std::optional<std::string> error;
  std::vector<JobId> children;

  friend bool operator==(const TacticStatus&, const TacticStatus&) = default;
};

/// Sketch database change. `op` is create, modify or delete.
struct SketchUpdate {
  static constexpr std::string_view kTopic = "/sketch";

  std::uint64_t request_id = 0;
  AgentId c2_id = 0;
  std::string op;
  std::optional<std::uint64_t> sketch_id;
  std::string type_name;
  std::vector<geom::Vec3> vertices;
  bool closed = false;

  friend bool operator==(const SketchUpdate&, const SketchUpdate&) = default;
};

using AnyMessage = std::variant<Heartbeat, Job, Bid, Cmd, Detection, GridOverlay, TaskResult, TacticDefs, TacticRequest,
                                TacticStatus, SketchUpdate>;

/// Every swarm topic with its schema. Field order is the wire contract.
const wire::TopicTable& topic_table();

wire::FieldList to_fields(const Heartbeat& m);
wire::FieldList to_fields(const Job& m);
wire::FieldList to_fields(const Bid& m);
wire::FieldList to_fields(const Cmd& m);
wire::FieldList to_fields(const Detection& m);
wire::FieldList to_fields(const GridOverlay& m);
wire::FieldList to_fields(const TaskResult& m);
wire::FieldList to_fields(const TacticDefs& m);
wire::FieldList to_fields(const TacticRequest& m);
wire::FieldList to_fields(const TacticStatus& m);
wire::FieldList to_fields(const SketchUpdate& m);

/// Throws wire::CodecError when the fields do not describe a valid message
/// (bad enum value, battery outside [0,1], non-finite position, ...).
template <class T>
T from_fields(const wire::FieldList& fields);

template <class T>
wire::Bytes encode(const T& m, std::string_view topic = T::kTopic) {
  return wire::encode_frame_bytes(topic_table(), topic, to_fields(m));
}

struct Inbound {
  std::string topic;
  AnyMessage message;
};

/// Frame decoder with semantic validation on top of the schema check.
class MessageDecoder {
 public:
  MessageDecoder() : frames_(topic_table()) {}

  std::optional<Inbound> decode(std::span<const std::uint8_t> frame);

  std::uint64_t dropped_unknown() const { return frames_.dropped_unknown(); }
  std::uint64_t decode_errors() const { return frames_.decode_errors(); }
  std::uint64_t invalid() const { return invalid_; }

 private:
  wire::FrameDecoder frames_;
  std::uint64_t invalid_ = 0;
};

wire::Value to_value(geom::Vec3 v);
geom::Vec3 vec3_from(const wire::Value& v);
wire::Value to_value(const ParamList& params);
ParamList params_from(const wire::Value& v);

}  // namespace swarm::msg
