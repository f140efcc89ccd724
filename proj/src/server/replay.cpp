#include "swarm/server/replay.hpp"

#include <fstream>
#include <iterator>
#include <ostream>

namespace swarm::server {

namespace {

void put_be(wire::Bytes& out, std::uint64_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v = (v << 8) | in[at + static_cast<std::size_t>(i)];
  return v;
}

constexpr std::size_t kFixed = 1 + 8;

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t h) {
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

wire::Bytes serialize_record(const ReplayRecord& r) {
  wire::Bytes out;
  out.reserve(4 + kFixed + r.payload.size());
  put_be(out, kFixed + r.payload.size(), 4);
  out.push_back(static_cast<std::uint8_t>(r.kind));
  put_be(out, r.tick, 8);
  out.insert(out.end(), r.payload.begin(), r.payload.end());
  return out;
}

void ReplayLog::append(RecordKind kind, std::uint64_t tick, wire::Bytes payload) {
  if (finished_) throw ReplayError("append after end of log");
  ReplayRecord r{kind, tick, std::move(payload)};
  wire::Bytes bytes = serialize_record(r);
  if (kind != RecordKind::end) hash_ = fnv1a64(bytes, hash_);
  if (sink_) sink_->write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (retain_ || kind == RecordKind::header || kind == RecordKind::input || kind == RecordKind::end) {
    records_.push_back(std::move(r));
  }
}

void ReplayLog::append_text(RecordKind kind, std::uint64_t tick, std::string_view text) {
  append(kind, tick, wire::Bytes(text.begin(), text.end()));
}

void ReplayLog::finish(std::uint64_t ticks) {
  if (finished_) return;
  wire::Bytes p;
  put_be(p, ticks, 8);
  put_be(p, hash_, 8);
  append(RecordKind::end, ticks, std::move(p));
  finished_ = true;
  if (sink_) sink_->flush();
}

void ReplayLog::set_sink(std::ostream* out) {
  sink_ = out;
  if (!sink_) return;
  for (const auto& r : records_) {
    wire::Bytes bytes = serialize_record(r);
    sink_->write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

std::vector<ReplayRecord> parse_replay(std::span<const std::uint8_t> bytes) {
  std::vector<ReplayRecord> out;
  std::size_t at = 0;
  while (at < bytes.size()) {
    if (bytes.size() - at < 4) throw ReplayError("truncated record length at byte " + std::to_string(at));
    std::size_t len = get_be(bytes, at, 4);
    at += 4;
    if (len < kFixed || bytes.size() - at < len) throw ReplayError("truncated record at byte " + std::to_string(at));
    std::uint8_t kind = bytes[at];
    if (kind < 1 || kind > 5) throw ReplayError("unknown record kind " + std::to_string(kind));
    ReplayRecord r;
    r.kind = static_cast<RecordKind>(kind);
    r.tick = get_be(bytes, at + 1, 8);
    r.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(at + kFixed),
                     bytes.begin() + static_cast<std::ptrdiff_t>(at + len));
    at += len;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ReplayRecord> read_replay(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReplayError(path + ": cannot open");
  wire::Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_replay(bytes);
}

EndMarker end_marker(const ReplayRecord& r) {
  if (r.kind != RecordKind::end || r.payload.size() != 16) throw ReplayError("not an end record");
  return {get_be(r.payload, 0, 8), get_be(r.payload, 8, 8)};
}

}  // namespace swarm::server
