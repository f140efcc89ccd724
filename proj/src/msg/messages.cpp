#include "swarm/msg/messages.hpp"

#include <cmath>
#include <limits>

namespace swarm::msg {

using wire::Array;
using wire::CodecError;
using wire::FieldKind;
using wire::FieldList;
using wire::Value;

namespace {

wire::TopicTable build_table() {
  using K = FieldKind;
  wire::TopicTable t;
  const wire::MessageSchema heartbeat{"Heartbeat",
                                      {{"agent_id", K::unsigned_integer},
                                       {"platform", K::unsigned_integer},
                                       {"position", K::array},
                                       {"battery", K::real},
                                       {"status", K::unsigned_integer},
                                       {"task_id", K::unsigned_integer, true},
                                       {"payload", K::unsigned_integer},
                                       {"fidelity", K::unsigned_integer},
                                       {"config_hash", K::unsigned_integer}}};
  t.register_topic(std::string(Heartbeat::kTopic), heartbeat);
  t.register_topic(std::string(Heartbeat::kC2Topic), heartbeat);
  t.register_topic(std::string(Job::kTopic), {"Job",
                                              {{"job_id", K::unsigned_integer},
                                               {"tactic_id", K::unsigned_integer},
                                               {"primitive", K::text},
                                               {"waypoints", K::array},
                                               {"params", K::array},
                                               {"platforms", K::array},
                                               {"payloads", K::array},
                                               {"selection", K::array}}});
  t.register_topic(std::string(Bid::kTopic),
                   {"Bid", {{"job_id", K::unsigned_integer}, {"agent_id", K::unsigned_integer}, {"value", K::real, true}}});
  t.register_topic(std::string(Cmd::kTopic), {"Cmd", {{"assignments", K::array}, {"cancellations", K::array}}});
  t.register_topic(std::string(Detection::kTopic), {"Detection",
                                                    {{"reporter", K::unsigned_integer},
                                                     {"outer_id", K::unsigned_integer},
                                                     {"inner_id", K::unsigned_integer, true},
                                                     {"role", K::unsigned_integer},
                                                     {"position", K::array},
                                                     {"timestamp", K::real}}});
  t.register_topic(std::string(GridOverlay::kTopic), {"GridOverlay",
                                                      {{"name", K::text},
                                                       {"origin", K::array},
                                                       {"cell_size", K::real},
                                                       {"width", K::unsigned_integer},
                                                       {"height", K::unsigned_integer},
                                                       {"values", K::array}}});
  t.register_topic(std::string(TaskResult::kTopic), {"TaskResult",
                                                     {{"job_id", K::unsigned_integer},
                                                      {"agent_id", K::unsigned_integer},
                                                      {"outcome", K::unsigned_integer}}});
  t.register_topic(std::string(TacticDefs::kTopic),
                   {"TacticDefs", {{"c2_id", K::unsigned_integer}, {"definitions", K::array}}});
  t.register_topic(std::string(TacticRequest::kTopic), {"TacticRequest",
                                                        {{"request_id", K::unsigned_integer},
                                                         {"c2_id", K::unsigned_integer},
                                                         {"op", K::text},
                                                         {"definition", K::text},
                                                         {"position", K::array},
                                                         {"params", K::array},
                                                         {"selection", K::array, true},
                                                         {"ref_a", K::unsigned_integer, true},
                                                         {"ref_b", K::unsigned_integer, true},
                                                         {"deferred", K::boolean}}});
  t.register_topic(std::string(TacticStatus::kTopic), {"TacticStatus",
                                                       {{"request_id", K::unsigned_integer},
                                                        {"c2_id", K::unsigned_integer},
                                                        {"instance_id", K::unsigned_integer, true},
                                                        {"definition", K::text},
                                                        {"status", K::text},
                                                        {"error", K::text, true},
                                                        {"children", K::array}}});
  t.register_topic(std::string(SketchUpdate::kTopic), {"SketchUpdate",
                                                       {{"request_id", K::unsigned_integer},
                                                        {"c2_id", K::unsigned_integer},
                                                        {"op", K::text},
                                                        {"sketch_id", K::unsigned_integer, true},
                                                        {"type_name", K::text},
                                                        {"vertices", K::array},
                                                        {"closed", K::boolean}}});
  return t;
}

template <class E>
E enum_from(const Value& v, E last, const char* what) {
  const auto raw = v.as_uint();
  if (raw > static_cast<std::uint64_t>(last)) throw CodecError(std::string("invalid ") + what + " value");
  return static_cast<E>(raw);
}

template <class E>
Value enum_value(E e) {
  return static_cast<std::uint64_t>(e);
}

std::uint32_t u32(const Value& v, const char* what) {
  const auto raw = v.as_uint();
  if (raw > std::numeric_limits<std::uint32_t>::max()) throw CodecError(std::string(what) + " out of range");
  return static_cast<std::uint32_t>(raw);
}

template <class T, class F>
Array array_of(const std::vector<T>& items, F&& f) {
  Array a;
  a.reserve(items.size());
  for (const auto& x : items) a.push_back(f(x));
  return a;
}

template <class T, class F>
std::vector<T> vector_from(const Value& v, F&& f) {
  std::vector<T> out;
  const auto& a = v.as_array();
  out.reserve(a.size());
  for (const auto& x : a) out.push_back(f(x));
  return out;
}

Value optional_uint(const std::optional<std::uint64_t>& o) { return o ? Value(*o) : Value(); }

std::vector<geom::Vec3> points_from(const Value& v) { return vector_from<geom::Vec3>(v, vec3_from); }
Array points_to(const std::vector<geom::Vec3>& pts) { return array_of(pts, [](geom::Vec3 p) { return to_value(p); }); }

Array agent_ids(const std::vector<AgentId>& ids) {
  return array_of(ids, [](AgentId a) { return Value(static_cast<std::uint64_t>(a)); });
}
std::vector<AgentId> agent_ids_from(const Value& v) {
  return vector_from<AgentId>(v, [](const Value& x) { return u32(x, "agent id"); });
}

}  // namespace

const wire::TopicTable& topic_table() {
  static const wire::TopicTable table = build_table();
  return table;
}

Value to_value(geom::Vec3 v) { return Array{v.x, v.y, v.z}; }

geom::Vec3 vec3_from(const Value& v) {
  const auto& a = v.as_array();
  if (a.size() != 3) throw CodecError("position must have 3 components");
  geom::Vec3 p{a[0].as_real(), a[1].as_real(), a[2].as_real()};
  if (!geom::finite(p)) throw CodecError("position is not finite");
  return p;
}

Value to_value(const ParamList& params) {
  Array a;
  a.reserve(params.size());
  for (const auto& [name, value] : params) a.push_back(Array{name, value});
  return a;
}

ParamList params_from(const Value& v) {
  ParamList out;
  for (const auto& e : v.as_array()) {
    const auto& pair = e.as_array();
    if (pair.size() != 2) throw CodecError("parameter entries are [name, value] pairs");
    out.emplace_back(pair[0].as_text(), pair[1]);
  }
  return out;
}

const Value* Job::param(std::string_view name) const {
  for (const auto& [n, v] : params)
    if (n == name) return &v;
  return nullptr;
}

double Job::param_real(std::string_view name, double fallback) const {
  const auto* v = param(name);
  return v != nullptr && v->is_number() ? v->as_real() : fallback;
}

// ---------------------------------------------------------------------------

FieldList to_fields(const Heartbeat& m) {
  return {static_cast<std::uint64_t>(m.agent_id), enum_value(m.platform), to_value(m.position), m.battery,
          enum_value(m.status), optional_uint(m.task_id), enum_value(m.payload),
          static_cast<std::uint64_t>(m.fidelity), static_cast<std::uint64_t>(m.config_hash)};
}

template <>
Heartbeat from_fields<Heartbeat>(const FieldList& f) {
  Heartbeat m;
  m.agent_id = u32(f.at(0), "agent id");
  m.platform = enum_from(f.at(1), PlatformKind::c2, "platform");
  m.position = vec3_from(f.at(2));
  m.battery = f.at(3).as_real();
  if (!(m.battery >= 0.0 && m.battery <= 1.0)) throw CodecError("battery outside [0,1]");
  m.status = enum_from(f.at(4), AgentStatus::disabled, "status");
  if (!f.at(5).is_nil()) m.task_id = f.at(5).as_uint();
  m.payload = enum_from(f.at(6), PayloadKind::cf, "payload");
  const auto fid = f.at(7).as_uint();
  if (fid > 255) throw CodecError("fidelity out of range");
  m.fidelity = static_cast<std::uint8_t>(fid);
  m.config_hash = u32(f.at(8), "config hash");
  return m;
}

FieldList to_fields(const Job& m) {
  return {m.job_id,
          m.tactic_id,
          m.primitive,
          points_to(m.waypoints),
          to_value(m.params),
          array_of(m.platforms, [](PlatformKind k) { return enum_value(k); }),
          array_of(m.payloads, [](PayloadKind k) { return enum_value(k); }),
          agent_ids(m.selection)};
}

template <>
Job from_fields<Job>(const FieldList& f) {
  Job m;
  m.job_id = f.at(0).as_uint();
  m.tactic_id = f.at(1).as_uint();
  m.primitive = f.at(2).as_text();
  m.waypoints = points_from(f.at(3));
  m.params = params_from(f.at(4));
  m.platforms = vector_from<PlatformKind>(f.at(5), [](const Value& v) { return enum_from(v, PlatformKind::c2, "platform"); });
  m.payloads = vector_from<PayloadKind>(f.at(6), [](const Value& v) { return enum_from(v, PayloadKind::cf, "payload"); });
  m.selection = agent_ids_from(f.at(7));
  return m;
}

FieldList to_fields(const Bid& m) {
  return {m.job_id, static_cast<std::uint64_t>(m.agent_id), m.value ? Value(*m.value) : Value()};
}

template <>
Bid from_fields<Bid>(const FieldList& f) {
  Bid m;
  m.job_id = f.at(0).as_uint();
  m.agent_id = u32(f.at(1), "agent id");
  if (!f.at(2).is_nil()) {
    m.value = f.at(2).as_real();
    if (!(*m.value >= 0.0) || !std::isfinite(*m.value)) throw CodecError("bid value must be finite and nonnegative");
  }
  return m;
}

FieldList to_fields(const Cmd& m) {
  Array assignments;
  for (const auto& [job, agent] : m.assignments) assignments.push_back(Array{job, static_cast<std::uint64_t>(agent)});
  return {std::move(assignments), array_of(m.cancellations, [](JobId j) { return Value(j); })};
}

template <>
Cmd from_fields<Cmd>(const FieldList& f) {
  Cmd m;
  for (const auto& e : f.at(0).as_array()) {
    const auto& pair = e.as_array();
    if (pair.size() != 2) throw CodecError("assignment entries are [job, agent] pairs");
    m.assignments.emplace_back(pair[0].as_uint(), u32(pair[1], "agent id"));
  }
  m.cancellations = vector_from<JobId>(f.at(1), [](const Value& v) { return v.as_uint(); });
  return m;
}

FieldList to_fields(const Detection& m) {
  return {static_cast<std::uint64_t>(m.reporter),
          static_cast<std::uint64_t>(m.outer_id),
          m.inner_id ? Value(static_cast<std::uint64_t>(*m.inner_id)) : Value(),
          enum_value(m.role),
          to_value(m.position),
          m.timestamp};
}

template <>
Detection from_fields<Detection>(const FieldList& f) {
  Detection m;
  m.reporter = u32(f.at(0), "reporter");
  m.outer_id = u32(f.at(1), "outer id");
  if (!f.at(2).is_nil()) m.inner_id = u32(f.at(2), "inner id");
  m.role = enum_from(f.at(3), ArtifactRole::intel, "role");
  m.position = vec3_from(f.at(4));
  m.timestamp = f.at(5).as_real();
  if (!std::isfinite(m.timestamp)) throw CodecError("timestamp is not finite");
  return m;
}

FieldList to_fields(const GridOverlay& m) {
  return {m.name,
          Array{m.origin.x, m.origin.y},
          m.cell_size,
          static_cast<std::uint64_t>(m.width),
          static_cast<std::uint64_t>(m.height),
          array_of(m.values, [](double v) { return Value(v); })};
}

template <>
GridOverlay from_fields<GridOverlay>(const FieldList& f) {
  GridOverlay m;
  m.name = f.at(0).as_text();
  const auto& o = f.at(1).as_array();
  if (o.size() != 2) throw CodecError("origin must have 2 components");
  m.origin = {o[0].as_real(), o[1].as_real()};
  m.cell_size = f.at(2).as_real();
  if (!(m.cell_size > 0.0)) throw CodecError("cell size must be positive");
  m.width = u32(f.at(3), "width");
  m.height = u32(f.at(4), "height");
  m.values = vector_from<double>(f.at(5), [](const Value& v) { return v.as_real(); });
  if (m.values.size() != static_cast<std::size_t>(m.width) * m.height) throw CodecError("grid value count mismatch");
  return m;
}

FieldList to_fields(const TaskResult& m) {
  return {m.job_id, static_cast<std::uint64_t>(m.agent_id), enum_value(m.outcome)};
}

template <>
TaskResult from_fields<TaskResult>(const FieldList& f) {
  return {f.at(0).as_uint(), u32(f.at(1), "agent id"), enum_from(f.at(2), TaskOutcome::cancelled, "outcome")};
}

FieldList to_fields(const TacticDefs& m) { return {static_cast<std::uint64_t>(m.c2_id), m.definitions}; }

template <>
TacticDefs from_fields<TacticDefs>(const FieldList& f) {
  return {u32(f.at(0), "c2 id"), f.at(1).as_array()};
}

FieldList to_fields(const TacticRequest& m) {
  return {m.request_id,
          static_cast<std::uint64_t>(m.c2_id),
          m.op,
          m.definition,
          to_value(m.position),
          to_value(m.params),
          m.selection ? Value(agent_ids(*m.selection)) : Value(),
          optional_uint(m.ref_a),
          optional_uint(m.ref_b),
          m.deferred};
}

template <>
TacticRequest from_fields<TacticRequest>(const FieldList& f) {
  TacticRequest m;
  m.request_id = f.at(0).as_uint();
  m.c2_id = u32(f.at(1), "c2 id");
  m.op = f.at(2).as_text();
  m.definition = f.at(3).as_text();
  m.position = vec3_from(f.at(4));
  m.params = params_from(f.at(5));
  if (!f.at(6).is_nil()) m.selection = agent_ids_from(f.at(6));
  if (!f.at(7).is_nil()) m.ref_a = f.at(7).as_uint();
  if (!f.at(8).is_nil()) m.ref_b = f.at(8).as_uint();
  m.deferred = f.at(9).as_bool();
  return m;
}

FieldList to_fields(const TacticStatus& m) {
  return {m.request_id,
          static_cast<std::uint64_t>(m.c2_id),
          optional_uint(m.instance_id),
          m.definition,
          m.status,
          m.error ? Value(*m.error) : Value(),
          array_of(m.children, [](JobId j) { return Value(j); })};
}

template <>
TacticStatus from_fields<TacticStatus>(const FieldList& f) {
  TacticStatus m;
  m.request_id = f.at(0).as_uint();
  m.c2_id = u32(f.at(1), "c2 id");
  if (!f.at(2).is_nil()) m.instance_id = f.at(2).as_uint();
  m.definition = f.at(3).as_text();
  m.status = f.at(4).as_text();
  if (!f.at(5).is_nil()) m.error = f.at(5).as_text();
  m.children = vector_from<JobId>(f.at(6), [](const Value& v) { return v.as_uint(); });
  return m;
}

FieldList to_fields(const SketchUpdate& m) {
  return {m.request_id, static_cast<std::uint64_t>(m.c2_id), m.op, optional_uint(m.sketch_id),
          m.type_name,  points_to(m.vertices),                 m.closed};
}

template <>
SketchUpdate from_fields<SketchUpdate>(const FieldList& f) {
  SketchUpdate m;
  m.request_id = f.at(0).as_uint();
  m.c2_id = u32(f.at(1), "c2 id");
  m.op = f.at(2).as_text();
  if (!f.at(3).is_nil()) m.sketch_id = f.at(3).as_uint();
  m.type_name = f.at(4).as_text();
  m.vertices = points_from(f.at(5));
  m.closed = f.at(6).as_bool();
  return m;
}

// ---------------------------------------------------------------------------

namespace {

AnyMessage dispatch(std::string_view topic, const FieldList& f) {
  if (topic == Heartbeat::kTopic || topic == Heartbeat::kC2Topic) return from_fields<Heartbeat>(f);
  if (topic == Job::kTopic) return from_fields<Job>(f);
  if (topic == Bid::kTopic) return from_fields<Bid>(f);
  if (topic == Cmd::kTopic) return from_fields<Cmd>(f);
  if (topic == Detection::kTopic) return from_fields<Detection>(f);
  if (topic == GridOverlay::kTopic) return from_fields<GridOverlay>(f);
  if (topic == TaskResult::kTopic) return from_fields<TaskResult>(f);
  if (topic == TacticDefs::kTopic) return from_fields<TacticDefs>(f);
  if (topic == TacticRequest::kTopic) return from_fields<TacticRequest>(f);
  if (topic == TacticStatus::kTopic) return from_fields<TacticStatus>(f);
  if (topic == SketchUpdate::kTopic) return from_fields<SketchUpdate>(f);
  throw CodecError("no message type for topic " + std::string(topic));
}

}  // namespace

std::optional<Inbound> MessageDecoder::decode(std::span<const std::uint8_t> frame) {
  auto decoded = frames_.decode(frame);
  if (!decoded) return std::nullopt;
  try {
    return Inbound{decoded->topic, dispatch(decoded->topic, decoded->fields)};
  } catch (const std::exception&) {
    ++invalid_;
    return std::nullopt;
  }
}

}  // namespace swarm::msg
