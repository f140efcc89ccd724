#include "swarm/wire/codec.hpp"

namespace swarm::wire {

namespace {

bool kind_matches(FieldKind expected, const Value& v) {
  switch (expected) {
    case FieldKind::boolean: return v.kind() == ValueKind::boolean;
    case FieldKind::integer: return v.is_integer();
    case FieldKind::unsigned_integer:
      return v.kind() == ValueKind::unsigned_integer ||
             (v.kind() == ValueKind::integer && std::get<std::int64_t>(v.data) >= 0);
    case FieldKind::real: return v.is_number();
    case FieldKind::text: return v.kind() == ValueKind::text;
    case FieldKind::binary: return v.kind() == ValueKind::binary;
    case FieldKind::array: return v.kind() == ValueKind::array;
    case FieldKind::any: return true;
  }
  return false;
}

}  // namespace

std::string check_fields(const MessageSchema& schema, const FieldList& fields) {
  if (fields.size() != schema.fields.size()) {
    return schema.name + ": expected " + std::to_string(schema.fields.size()) + " fields, got " +
           std::to_string(fields.size());
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& spec = schema.fields[i];
    if (fields[i].is_nil() && (spec.optional || spec.kind == FieldKind::any)) continue;
    if (!kind_matches(spec.kind, fields[i])) return schema.name + "." + spec.name + ": value kind does not match schema";
  }
  return {};
}

TopicHash TopicTable::register_topic(std::string topic, MessageSchema schema) {
  const TopicHash h = djb2_hash(topic);
  if (auto it = entries_.find(h.value); it != entries_.end()) {
    if (it->second.topic == topic) throw CodecError("topic already registered: " + topic);
    throw CodecError("topic hash collision between '" + topic + "' and '" + it->second.topic + "'");
  }
  entries_.emplace(h.value, TopicEntry{std::move(topic), std::move(schema)});
  return h;
}

const TopicEntry* TopicTable::find(TopicHash hash) const {
  auto it = entries_.find(hash.value);
  return it == entries_.end() ? nullptr : &it->second;
}

const TopicEntry* TopicTable::find(std::string_view topic) const {
  const auto* e = find(djb2_hash(topic));
  return e != nullptr && e->topic == topic ? e : nullptr;
}

Bytes WireFrame::serialize() const {
  Bytes out;
  out.reserve(size());
  out.push_back(static_cast<std::uint8_t>(topic_hash.value >> 24));
  out.push_back(static_cast<std::uint8_t>(topic_hash.value >> 16));
  out.push_back(static_cast<std::uint8_t>(topic_hash.value >> 8));
  out.push_back(static_cast<std::uint8_t>(topic_hash.value));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

WireFrame encode_frame(const TopicTable& table, std::string_view topic, const FieldList& fields) {
  const auto* entry = table.find(topic);
  if (entry == nullptr) throw CodecError("unknown topic: " + std::string(topic));
  if (auto err = check_fields(entry->schema, fields); !err.empty()) throw CodecError(err);
  WireFrame frame{djb2_hash(topic), {}};
  for (const auto& v : fields) pack(v, frame.payload);
  return frame;
}

Bytes encode_frame_bytes(const TopicTable& table, std::string_view topic, const FieldList& fields) {
  return encode_frame(table, topic, fields).serialize();
}

std::optional<TopicHash> peek_topic(std::span<const std::uint8_t> frame) {
  if (frame.size() < 4) return std::nullopt;
  return TopicHash{(std::uint32_t{frame[0]} << 24) | (std::uint32_t{frame[1]} << 16) | (std::uint32_t{frame[2]} << 8) |
                   std::uint32_t{frame[3]}};
}

DecodeResult decode_frame(std::span<const std::uint8_t> frame, const TopicTable& table) {
  DecodeResult result;
  const auto hash = peek_topic(frame);
  if (!hash) {
    result.status = DecodeStatus::short_frame;
    result.error = "frame shorter than 4-byte header";
    return result;
  }
  const auto* entry = table.find(*hash);
  if (entry == nullptr) {
    result.status = DecodeStatus::unknown_topic;
    return result;
  }
  DecodedMessage msg{entry->topic, {}};
  msg.fields.reserve(entry->schema.fields.size());
  std::size_t pos = 4;
  try {
    for (std::size_t i = 0; i < entry->schema.fields.size(); ++i) msg.fields.push_back(unpack(frame, pos));
  } catch (const MsgpackError& e) {
    result.status = DecodeStatus::malformed;
    result.error = entry->topic + ": " + e.what();
    return result;
  }
  if (pos != frame.size()) {
    result.status = DecodeStatus::malformed;
    result.error = entry->topic + ": trailing bytes after last field";
    return result;
  }
  if (auto err = check_fields(entry->schema, msg.fields); !err.empty()) {
    result.status = DecodeStatus::malformed;
    result.error = err;
    return result;
  }
  result.status = DecodeStatus::ok;
  result.message = std::move(msg);
  return result;
}

std::optional<DecodedMessage> FrameDecoder::decode(std::span<const std::uint8_t> frame) {
  auto r = decode_frame(frame, *table_);
  switch (r.status) {
    case DecodeStatus::ok: return std::move(r.message);
    case DecodeStatus::unknown_topic: ++dropped_unknown_; break;
    case DecodeStatus::short_frame:
    case DecodeStatus::malformed: ++decode_errors_; break;
  }
  return std::nullopt;
}

}  // namespace swarm::wire
