#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "swarm/wire/msgpack.hpp"

namespace swarm::wire {

struct TopicHash {
  std::uint32_t value = 0;
  friend bool operator==(TopicHash, TopicHash) = default;
};

/// Additive DJB2 over the raw bytes: h = 5381, h = h * 33 + c (mod 2^32).
constexpr TopicHash djb2_hash(std::string_view name) {
  std::uint32_t h = 5381;
  for (char c : name) h = h * 33u + static_cast<std::uint8_t>(c);
  return TopicHash{h};
}

/// Expected shape of one schema field. `any` accepts every value kind and is
/// used for heterogeneous parameter values.
enum class FieldKind : std::uint8_t { boolean, integer, unsigned_integer, real, text, binary, array, any };

struct FieldSpec {
  std::string name;
  FieldKind kind = FieldKind::any;
  bool optional = false;  // nil allowed
};

struct MessageSchema {
  std::string name;
  std::vector<FieldSpec> fields;
};

using FieldList = std::vector<Value>;

class CodecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks one field list against a schema; empty string when it conforms,
/// otherwise a description of the first mismatch.
std::string check_fields(const MessageSchema& schema, const FieldList& fields);

struct TopicEntry {
  std::string topic;
  MessageSchema schema;
};

class TopicTable {
 public:
  /// Throws CodecError on a duplicate name or a hash collision.
  TopicHash register_topic(std::string topic, MessageSchema schema);

  const TopicEntry* find(TopicHash hash) const;
  const TopicEntry* find(std::string_view topic) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::uint32_t, TopicEntry> entries_;
};

struct WireFrame {
  TopicHash topic_hash;
  Bytes payload;

  /// Header (4 bytes, big-endian hash) followed by the payload.
  Bytes serialize() const;
  std::size_t size() const { return 4 + payload.size(); }
};

/// Throws CodecError for an unknown topic or a field/schema mismatch.
WireFrame encode_frame(const TopicTable& table, std::string_view topic, const FieldList& fields);
Bytes encode_frame_bytes(const TopicTable& table, std::string_view topic, const FieldList& fields);

enum class DecodeStatus : std::uint8_t { ok, unknown_topic, short_frame, malformed };

struct DecodedMessage {
  std::string topic;
  FieldList fields;
};

struct DecodeResult {
  DecodeStatus status = DecodeStatus::malformed;
  std::optional<DecodedMessage> message;
  std::string error;
};

/// Pure decode of a serialized frame.
DecodeResult decode_frame(std::span<const std::uint8_t> frame, const TopicTable& table);

/// Only reads the header; nullopt for frames shorter than 4 bytes.
std::optional<TopicHash> peek_topic(std::span<const std::uint8_t> frame);

/// Stateful receive-side wrapper that keeps the drop and error counters.
/// Unknown-topic frames and malformed frames never reach the caller.
class FrameDecoder {
 public:
  explicit FrameDecoder(const TopicTable& table) : table_(&table) {}

  std::optional<DecodedMessage> decode(std::span<const std::uint8_t> frame);

  std::uint64_t dropped_unknown() const { return dropped_unknown_; }
  std::uint64_t decode_errors() const { return decode_errors_; }

 private:
  const TopicTable* table_;
  std::uint64_t dropped_unknown_ = 0;
  std::uint64_t decode_errors_ = 0;
};

}  // namespace swarm::wire
