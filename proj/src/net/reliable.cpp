#include "swarm/net/reliable.hpp"

#include <stdexcept>
#include <string>

namespace swarm::net {

namespace {

constexpr double kDeadlineEpsilon = 1e-9;

bool deadline_due(double deadline, double now, double tick) {
  if (tick > 0.0) return now + tick > deadline + kDeadlineEpsilon;
  return now >= deadline - kDeadlineEpsilon;
}

void put_be(wire::Bytes& out, std::uint64_t v, int width) {
  for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t off, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v = (v << 8) | in[off + static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

wire::Bytes PgmPacket::serialize() const {
  wire::Bytes out;
  out.reserve(size());
  out.push_back(static_cast<std::uint8_t>(type));
  put_be(out, source, 4);
  put_be(out, group, 2);
  put_be(out, sequence, 8);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::optional<PgmPacket> PgmPacket::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) return std::nullopt;
  if (bytes[0] > static_cast<std::uint8_t>(PgmType::gone)) return std::nullopt;
  PgmPacket p;
  p.type = static_cast<PgmType>(bytes[0]);
  p.source = static_cast<NodeId>(get_be(bytes, 1, 4));
  p.group = static_cast<GroupId>(get_be(bytes, 5, 2));
  p.sequence = get_be(bytes, 7, 8);
  const bool data = p.type == PgmType::odata || p.type == PgmType::rdata;
  if (!data && bytes.size() != kHeaderSize) return std::nullopt;
  p.payload.assign(bytes.begin() + kHeaderSize, bytes.end());
  return p;
}

// ---------------------------------------------------------------------------
// Sender

ReliableSender::ReliableSender(NodeId self, GroupId group, ReliableParams params)
    : self_(self), group_(group), params_(params) {}

bool ReliableSender::due(double deadline, double now) const {
  return deadline_due(deadline, now, params_.tick_interval_s);
}

PgmPacket ReliableSender::spm() const {
  return PgmPacket{PgmType::spm, self_, group_, next_seq_ == 0 ? 0 : next_seq_ - 1, {}};
}

PgmPacket ReliableSender::send(wire::Bytes payload, double now) {
  const std::uint64_t seq = next_seq_++;
  PgmPacket p{PgmType::odata, self_, group_, seq, payload};
  window_.emplace(seq, std::move(payload));
  while (window_.size() > params_.send_window) window_.erase(window_.begin());
  if (next_ambient_ == std::numeric_limits<double>::infinity()) next_ambient_ = now + params_.spm_ambient_interval_s;
  last_data_ = now;
  eot_pending_ = true;
  ++stats_.odata;
  return p;
}

void ReliableSender::on_nak(std::uint64_t sequence, double now) {
  ++stats_.naks_received;
  if (sequence >= next_seq_) return;
  if (window_.contains(sequence)) {
    pending_repair_.insert(sequence);
  } else {
    pending_gone_.insert(sequence);
  }
  if (!flush_at_) flush_at_ = now + params_.repair_interval_s;
}

std::size_t ReliableSender::repair_bytes_in_window(double now) const {
  std::size_t used = 0;
  for (const auto& [t, bytes] : repair_log_) {
    if (t > now - 1.0) used += bytes;
  }
  return used;
}

std::vector<PgmPacket> ReliableSender::tick(double now) {
  std::vector<PgmPacket> out;

  if (eot_pending_ && last_data_ && due(*last_data_ + params_.spm_eot_delay_s, now)) {
    out.push_back(spm());
    ++stats_.spm;
    eot_pending_ = false;
    next_ambient_ = std::numeric_limits<double>::infinity();
  } else if (next_ambient_ != std::numeric_limits<double>::infinity() && due(next_ambient_, now)) {
    out.push_back(spm());
    ++stats_.spm;
    next_ambient_ += params_.spm_ambient_interval_s;
  }

  if (flush_at_ && due(*flush_at_, now)) {
    for (auto seq : pending_gone_) {
      out.push_back(PgmPacket{PgmType::gone, self_, group_, seq, {}});
      ++stats_.gone;
    }
    pending_gone_.clear();

    while (!repair_log_.empty() && repair_log_.front().first <= now - 1.0) repair_log_.pop_front();
    std::size_t used = repair_bytes_in_window(now);
    for (auto it = pending_repair_.begin(); it != pending_repair_.end();) {
      auto win = window_.find(*it);
      const std::size_t size = win == window_.end() ? 0 : PgmPacket::kHeaderSize + win->second.size();
      if (win == window_.end() || size > params_.repair_rate_cap_bytes) {
        // Evicted since the NAK, or too large to ever fit the repair budget.
        out.push_back(PgmPacket{PgmType::gone, self_, group_, *it, {}});
        ++stats_.gone;
        it = pending_repair_.erase(it);
        continue;
      }
      if (used + size > params_.repair_rate_cap_bytes) break;
      out.push_back(PgmPacket{PgmType::rdata, self_, group_, *it, win->second});
      repair_log_.emplace_back(now, size);
      used += size;
      ++stats_.rdata;
      stats_.rdata_bytes += size;
      it = pending_repair_.erase(it);
    }
    if (pending_repair_.empty()) {
      flush_at_.reset();
    } else {
      flush_at_ = now;  // budget exhausted: retry every tick
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Receiver

ReliableReceiver::ReliableReceiver(NodeId self, GroupId group, ReliableParams params, StartPolicy policy)
    : self_(self), group_(group), params_(params), policy_(policy) {}

bool ReliableReceiver::due(double deadline, double now) const {
  return deadline_due(deadline, now, params_.tick_interval_s);
}

ReliableReceiver::SourceTrack& ReliableReceiver::track(NodeId source, std::uint64_t first_seen, bool from_spm) {
  auto& t = tracks_[source];
  if (!t.started) {
    t.started = true;
    if (policy_ == StartPolicy::from_zero) {
      t.next_expected = 0;
    } else {
      t.next_expected = from_spm ? first_seen + 1 : first_seen;
    }
  }
  return t;
}

void ReliableReceiver::note_gap(SourceTrack& t, std::uint64_t upto_exclusive, double now) {
  for (std::uint64_t q = t.next_expected; q < upto_exclusive; ++q) {
    if (t.buffered.contains(q) || t.missing.contains(q) || t.abandoned.contains(q)) continue;
    t.missing.emplace(q, NakRecord{q, now + params_.nak_backoff_s});
  }
}

void ReliableReceiver::abandon(SourceTrack& t, std::uint64_t sequence) {
  t.missing.erase(sequence);
  if (t.abandoned.insert(sequence).second) ++stats_.lost;
}

void ReliableReceiver::release(NodeId source, SourceTrack& t, std::vector<ReliableDelivery>& out) {
  for (;;) {
    if (auto it = t.buffered.find(t.next_expected); it != t.buffered.end()) {
      out.push_back(ReliableDelivery{source, it->first, std::move(it->second)});
      ++stats_.delivered;
      t.buffered.erase(it);
    } else if (auto ab = t.abandoned.find(t.next_expected); ab != t.abandoned.end()) {
      t.abandoned.erase(ab);
    } else {
      break;
    }
    ++t.next_expected;
  }
}

void ReliableReceiver::enforce_cap(NodeId source, SourceTrack& t, std::uint64_t highest,
                                   std::vector<ReliableDelivery>& out) {
  const std::uint64_t cap = params_.reorder_cap;
  if (highest + 1 <= cap) return;
  const std::uint64_t window_start = highest + 1 - cap;
  while (t.next_expected < window_start) {
    const std::uint64_t q = t.next_expected;
    if (auto it = t.buffered.find(q); it != t.buffered.end()) {
      out.push_back(ReliableDelivery{source, q, std::move(it->second)});
      ++stats_.delivered;
      t.buffered.erase(it);
    } else if (!t.abandoned.erase(q)) {
      t.missing.erase(q);
      ++stats_.lost;
    }
    ++t.next_expected;
  }
  release(source, t, out);
}

std::vector<ReliableDelivery> ReliableReceiver::on_packet(const PgmPacket& p, double now) {
  std::vector<ReliableDelivery> out;
  if (p.group != group_ || p.source == self_) return out;
  switch (p.type) {
    case PgmType::odata:
    case PgmType::rdata: {
      auto& t = track(p.source, p.sequence, false);
      if (p.sequence < t.next_expected || t.buffered.contains(p.sequence)) {
        ++stats_.duplicates;
        return out;
      }
      if (t.abandoned.erase(p.sequence) != 0) --stats_.lost;
      if (t.missing.erase(p.sequence) != 0) ++stats_.repaired;
      if (p.sequence == t.next_expected) {
        out.push_back(ReliableDelivery{p.source, p.sequence, p.payload});
        ++stats_.delivered;
        ++t.next_expected;
        release(p.source, t, out);
      } else {
        t.buffered.emplace(p.sequence, p.payload);
        enforce_cap(p.source, t, p.sequence, out);
        note_gap(t, p.sequence, now);
      }
      break;
    }
    case PgmType::spm: {
      auto& t = track(p.source, p.sequence, true);
      if (p.sequence >= t.next_expected) {
        enforce_cap(p.source, t, p.sequence, out);
        note_gap(t, p.sequence + 1, now);
      }
      break;
    }
    case PgmType::gone: {
      auto it = tracks_.find(p.source);
      if (it == tracks_.end()) break;
      auto& t = it->second;
      if (p.sequence >= t.next_expected && !t.buffered.contains(p.sequence)) {
        abandon(t, p.sequence);
        release(p.source, t, out);
      }
      break;
    }
    case PgmType::nak:
      break;
  }
  return out;
}

std::vector<PgmPacket> ReliableReceiver::tick(double now) {
  std::vector<PgmPacket> naks;
  for (auto& [source, t] : tracks_) {
    if (t.missing.empty()) continue;
    std::vector<std::uint64_t> exhausted;
    for (auto& [seq, rec] : t.missing) {
      if (rec.attempts == 0) {
        if (!due(rec.backoff_deadline, now)) continue;
      } else if (!due(rec.repeat_deadline, now)) {
        continue;
      }
      if (rec.attempts >= params_.nak_max_attempts) {
        exhausted.push_back(seq);
        continue;
      }
      ++rec.attempts;
      rec.repeat_deadline = now + params_.nak_repeat_s;
      naks.push_back(PgmPacket{PgmType::nak, source, group_, seq, {}});
      ++stats_.naks_sent;
    }
    if (exhausted.empty()) continue;
    for (auto seq : exhausted) abandon(t, seq);
    release(source, t, released_);
  }
  return naks;
}

std::vector<ReliableDelivery> ReliableReceiver::take_released() {
  std::vector<ReliableDelivery> out;
  out.swap(released_);
  return out;
}

bool ReliableReceiver::is_missing(NodeId source, std::uint64_t sequence) const {
  auto it = tracks_.find(source);
  return it != tracks_.end() && it->second.missing.contains(sequence);
}

std::size_t ReliableReceiver::missing_count() const {
  std::size_t n = 0;
  for (const auto& [source, t] : tracks_) n += t.missing.size();
  return n;
}

const NakRecord* ReliableReceiver::nak_record(NodeId source, std::uint64_t sequence) const {
  auto it = tracks_.find(source);
  if (it == tracks_.end()) return nullptr;
  auto r = it->second.missing.find(sequence);
  return r == it->second.missing.end() ? nullptr : &r->second;
}

// ---------------------------------------------------------------------------
// Endpoint

MulticastEndpoint::MulticastEndpoint(NodeId self, MeshNetwork& mesh, ReliableParams params, StartPolicy policy)
    : self_(self), mesh_(&mesh), params_(params), policy_(policy) {}

void MulticastEndpoint::join(GroupId group) {
  if (groups_.contains(group)) return;
  groups_.emplace(group, GroupState{ReliableSender(self_, group, params_), ReliableReceiver(self_, group, params_, policy_)});
  mesh_->join(self_, group);
}

void MulticastEndpoint::emit(GroupId group, Protocol protocol, wire::Bytes bytes, double now) {
  if (observer_) observer_(now, self_, protocol, bytes);
  mesh_->inject_multicast(self_, group, protocol, std::move(bytes));
}

void MulticastEndpoint::send(GroupId group, TransportClass transport, std::span<const std::uint8_t> frame,
                             double now) {
  auto it = groups_.find(group);
  if (it == groups_.end()) throw std::invalid_argument("endpoint " + std::to_string(self_) + " has not joined group " +
                                                       std::to_string(group));
  wire::Bytes bytes(frame.begin(), frame.end());
  if (transport == TransportClass::unreliable) {
    emit(group, Protocol::udp, std::move(bytes), now);
    return;
  }
  auto packet = it->second.sender.send(std::move(bytes), now);
  emit(group, Protocol::pgm, packet.serialize(), now);
}

std::vector<ReceivedFrame> MulticastEndpoint::on_delivery(const MeshDelivery& d) {
  std::vector<ReceivedFrame> out;
  if (d.origin == self_ || d.packet == nullptr) return out;
  auto it = groups_.find(d.group);
  if (it == groups_.end()) return out;
  if (d.protocol == Protocol::udp) {
    out.push_back(ReceivedFrame{d.origin, d.group, TransportClass::unreliable, *d.packet});
    return out;
  }
  auto packet = PgmPacket::parse(*d.packet);
  if (!packet) return out;
  if (packet->type == PgmType::nak) {
    if (packet->source == self_) it->second.sender.on_nak(packet->sequence, d.time);
    return out;
  }
  for (auto& del : it->second.receiver.on_packet(*packet, d.time))
    out.push_back(ReceivedFrame{del.source, d.group, TransportClass::reliable, std::move(del.payload)});
  return out;
}

std::vector<ReceivedFrame> MulticastEndpoint::tick(double now) {
  std::vector<ReceivedFrame> out;
  for (auto& [group, gs] : groups_) {
    for (auto& p : gs.sender.tick(now)) emit(group, Protocol::pgm, p.serialize(), now);
    for (auto& p : gs.receiver.tick(now)) emit(group, Protocol::pgm, p.serialize(), now);
    for (auto& del : gs.receiver.take_released())
      out.push_back(ReceivedFrame{del.source, group, TransportClass::reliable, std::move(del.payload)});
  }
  return out;
}

const ReliableSender* MulticastEndpoint::sender(GroupId group) const {
  auto it = groups_.find(group);
  return it == groups_.end() ? nullptr : &it->second.sender;
}

const ReliableReceiver* MulticastEndpoint::receiver(GroupId group) const {
  auto it = groups_.find(group);
  return it == groups_.end() ? nullptr : &it->second.receiver;
}

}  // namespace swarm::net
