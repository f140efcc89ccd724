#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "swarm/net/mesh.hpp"

namespace swarm::net {

enum class TransportClass : std::uint8_t { reliable, unreliable };

enum class PgmType : std::uint8_t { odata = 0, rdata = 1, spm = 2, nak = 3, gone = 4 };

/// type(1) source(4) group(2) sequence(8), all big-endian, then payload for
/// ODATA/RDATA. SPM carries the highest sequence sent; NAK and GONE carry the
/// sequence they refer to and `source` names the stream, not the requester.
struct PgmPacket {
  PgmType type = PgmType::odata;
  NodeId source = 0;
  GroupId group = 0;
  std::uint64_t sequence = 0;
  wire::Bytes payload;

  static constexpr std::size_t kHeaderSize = 15;

  wire::Bytes serialize() const;
  std::size_t size() const { return kHeaderSize + payload.size(); }
  static std::optional<PgmPacket> parse(std::span<const std::uint8_t> bytes);
};

/// Tuned for a constrained swarm mesh rather than PGM defaults.
struct ReliableParams {
  double spm_ambient_interval_s = 30.0;
  double spm_eot_delay_s = 30.0;
  double nak_backoff_s = 2.0;
  double nak_repeat_s = 10.0;
  int nak_max_attempts = 3;
  double repair_interval_s = 0.8;
  std::size_t repair_rate_cap_bytes = 1024;  // per sliding 1 s window
  std::size_t send_window = 256;
  std::size_t reorder_cap = 256;
  /// Engine tick; deadlines fire on the last tick at or before them.
  double tick_interval_s = 0.1;
};

struct SenderStats {
  std::uint64_t odata = 0;
  std::uint64_t rdata = 0;
  std::uint64_t rdata_bytes = 0;
  std::uint64_t spm = 0;
  std::uint64_t gone = 0;
  std::uint64_t naks_received = 0;
};

class ReliableSender {
 public:
  ReliableSender(NodeId self, GroupId group, ReliableParams params = {});

  /// Assigns the next sequence number and retains the frame.
  PgmPacket send(wire::Bytes payload, double now);
  void on_nak(std::uint64_t sequence, double now);
  /// SPMs, repairs and GONE markers due at `now`.
  std::vector<PgmPacket> tick(double now);

  std::uint64_t next_sequence() const { return next_seq_; }
  bool retains(std::uint64_t sequence) const { return window_.contains(sequence); }
  std::size_t pending_repairs() const { return pending_repair_.size() + pending_gone_.size(); }
  /// RDATA bytes in the sliding window ending at `now`.
  std::size_t repair_bytes_in_window(double now) const;
  const SenderStats& stats() const { return stats_; }

 private:
  bool due(double deadline, double now) const;
  PgmPacket spm() const;

  NodeId self_;
  GroupId group_;
  ReliableParams params_;
  std::uint64_t next_seq_ = 0;
  std::map<std::uint64_t, wire::Bytes> window_;
  std::optional<double> last_data_;
  double next_ambient_ = std::numeric_limits<double>::infinity();
  bool eot_pending_ = false;
  std::set<std::uint64_t> pending_repair_;
  std::set<std::uint64_t> pending_gone_;
  std::optional<double> flush_at_;
  std::deque<std::pair<double, std::size_t>> repair_log_;
  SenderStats stats_;
};

struct NakRecord {
  std::uint64_t sequence = 0;
  double backoff_deadline = 0.0;
  double repeat_deadline = std::numeric_limits<double>::infinity();
  int attempts = 0;
};

struct ReliableDelivery {
  NodeId source = 0;
  std::uint64_t sequence = 0;
  wire::Bytes payload;
};

struct ReceiverStats {
  std::uint64_t delivered = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t repaired = 0;
  std::uint64_t lost = 0;  // abandoned sequences
  std::uint64_t naks_sent = 0;
};

enum class StartPolicy : std::uint8_t {
  from_zero,            // present when the stream began
  from_first_observed,  // late joiner
};

/// Receive side for one group: per-source ordering, gap detection and NAK
/// scheduling. Delivery is in order per source with a bounded reorder buffer.
class ReliableReceiver {
 public:
  ReliableReceiver(NodeId self, GroupId group, ReliableParams params = {},
                   StartPolicy policy = StartPolicy::from_zero);

  std::vector<ReliableDelivery> on_packet(const PgmPacket& packet, double now);
  /// NAKs due at `now`; abandons sequences whose attempts are exhausted.
  std::vector<PgmPacket> tick(double now);
  /// Deliveries released by abandonment during the last tick().
  std::vector<ReliableDelivery> take_released();

  bool is_missing(NodeId source, std::uint64_t sequence) const;
  std::size_t missing_count() const;
  const NakRecord* nak_record(NodeId source, std::uint64_t sequence) const;
  const ReceiverStats& stats() const { return stats_; }

 private:
  struct SourceTrack {
    bool started = false;
    std::uint64_t next_expected = 0;
    std::map<std::uint64_t, wire::Bytes> buffered;
    std::map<std::uint64_t, NakRecord> missing;
    std::set<std::uint64_t> abandoned;
  };

  SourceTrack& track(NodeId source, std::uint64_t first_seen, bool from_spm);
  void note_gap(SourceTrack& t, std::uint64_t upto_exclusive, double now);
  void enforce_cap(NodeId source, SourceTrack& t, std::uint64_t highest, std::vector<ReliableDelivery>& out);
  void abandon(SourceTrack& t, std::uint64_t sequence);
  void release(NodeId source, SourceTrack& t, std::vector<ReliableDelivery>& out);
  bool due(double deadline, double now) const;

  NodeId self_;
  GroupId group_;
  ReliableParams params_;
  StartPolicy policy_;
  std::map<NodeId, SourceTrack> tracks_;
  std::vector<ReliableDelivery> released_;
  ReceiverStats stats_;
};

struct ReceivedFrame {
  NodeId source = 0;
  GroupId group = 0;
  TransportClass transport = TransportClass::unreliable;
  wire::Bytes frame;
};

/// One node's attachment to the mesh: a reliable sender and receiver per
/// joined group plus the fire-and-forget class.
class MulticastEndpoint {
 public:
  using EmitObserver = std::function<void(double time, NodeId self, Protocol, const wire::Bytes&)>;

  MulticastEndpoint(NodeId self, MeshNetwork& mesh, ReliableParams params = {},
                    StartPolicy policy = StartPolicy::from_zero);

  void join(GroupId group);
  bool joined(GroupId group) const { return groups_.contains(group); }

  /// Throws std::invalid_argument for a group this endpoint has not joined.
  void send(GroupId group, TransportClass transport, std::span<const std::uint8_t> frame, double now);
  std::vector<ReceivedFrame> on_delivery(const MeshDelivery& delivery);
  /// Runs timers and injects any SPM/NAK/RDATA into the mesh.
  std::vector<ReceivedFrame> tick(double now);

  NodeId id() const { return self_; }
  const ReliableSender* sender(GroupId group) const;
  const ReliableReceiver* receiver(GroupId group) const;
  void set_emit_observer(EmitObserver observer) { observer_ = std::move(observer); }

 private:
  struct GroupState {
    ReliableSender sender;
    ReliableReceiver receiver;
  };

  void emit(GroupId group, Protocol protocol, wire::Bytes bytes, double now);

  NodeId self_;
  MeshNetwork* mesh_;
  ReliableParams params_;
  StartPolicy policy_;
  std::map<GroupId, GroupState> groups_;
  EmitObserver observer_;
};

}  // namespace swarm::net
