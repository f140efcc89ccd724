#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarm/wire/msgpack.hpp"

namespace swarm::server {

class ReplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RecordKind : std::uint8_t {
  header = 1,  // JSON: scenario text and seed
  input = 2,   // JSON console command applied at this tick
  frame = 3,   // u32 sender node id, then the wire frame
  event = 4,   // JSON engine event (status change, job event, kill, e-stop)
  end = 5,     // u64 tick count, u64 hash
};

struct ReplayRecord {
  RecordKind kind = RecordKind::header;
  std::uint64_t tick = 0;
  wire::Bytes payload;
  friend bool operator==(const ReplayRecord&, const ReplayRecord&) = default;
};

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t h = kFnvOffset);

/// u32 length (of kind + tick + payload), u8 kind, u64 tick, payload; all
/// big-endian.
wire::Bytes serialize_record(const ReplayRecord& r);

/// Ordered event log with a running FNV-1a 64 hash over every serialized
/// record except the end marker.
class ReplayLog {
 public:
  ReplayLog() = default;

  void append(RecordKind kind, std::uint64_t tick, wire::Bytes payload);
  void append_text(RecordKind kind, std::uint64_t tick, std::string_view text);
  /// Appends the end record (idempotent).
  void finish(std::uint64_t ticks);

  std::uint64_t hash() const { return hash_; }
  bool finished() const { return finished_; }
  const std::vector<ReplayRecord>& records() const { return records_; }
  /// Records are written through to the stream as they are appended.
  void set_sink(std::ostream* out);
  /// Drops retained records, keeping the hash (long runs that only stream).
  void set_retain(bool retain) { retain_ = retain; }

 private:
  std::vector<ReplayRecord> records_;
  std::uint64_t hash_ = kFnvOffset;
  std::ostream* sink_ = nullptr;
  bool retain_ = true;
  bool finished_ = false;
};

std::vector<ReplayRecord> parse_replay(std::span<const std::uint8_t> bytes);
std::vector<ReplayRecord> read_replay(const std::string& path);

struct EndMarker {
  std::uint64_t ticks = 0;
  std::uint64_t hash = 0;
};
EndMarker end_marker(const ReplayRecord& r);

}  // namespace swarm::server
