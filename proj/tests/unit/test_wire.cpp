#include <cstdint>
#include <random>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "swarm/wire/codec.hpp"
#include "swarm/wire/msgpack.hpp"

using namespace swarm::wire;

namespace {

// Independent DJB2: 64-bit accumulator reduced explicitly each step.
std::uint32_t djb2_oracle(const std::string& s) {
  std::uint64_t h = 5381;
  for (unsigned char c : s) h = (h * 33 + c) % 4294967296ull;
  return static_cast<std::uint32_t>(h);
}

nlohmann::json to_json(const Value& v) {
  switch (v.kind()) {
    case ValueKind::nil: return nullptr;
    case ValueKind::boolean: return v.as_bool();
    case ValueKind::integer: return v.as_int();
    case ValueKind::unsigned_integer: return v.as_uint();
    case ValueKind::real: return v.as_real();
    case ValueKind::text: return v.as_text();
    case ValueKind::binary: return nlohmann::json::binary(v.as_binary());
    case ValueKind::array: {
      auto arr = nlohmann::json::array();
      for (const auto& e : v.as_array()) arr.push_back(to_json(e));
      return arr;
    }
  }
  return nullptr;
}

Value random_value(std::mt19937_64& rng, int depth) {
  const int kind = static_cast<int>(rng() % (depth > 2 ? 7 : 8));
  switch (kind) {
    case 0: return nullptr;
    case 1: return (rng() & 1) != 0;
    case 2: {
      static const std::int64_t edges[] = {0, 1, 127, 128, 255, 256, 65535, 65536, -1, -32, -33, -128, -129,
                                           -32768, -32769, 4294967295ll, 4294967296ll, INT64_MIN, INT64_MAX};
      if (rng() % 2 == 0) return edges[rng() % std::size(edges)];
      return static_cast<std::int64_t>(rng()) >> (rng() % 63);
    }
    case 3: return static_cast<std::uint64_t>(rng());
    case 4: {
      if (rng() % 3 == 0) return static_cast<double>(static_cast<float>(rng() % 1000) / 8.0f);
      std::uniform_real_distribution<double> d(-1e6, 1e6);
      return d(rng);
    }
    case 5: {
      std::string s(rng() % 40 == 0 ? 300 : rng() % 40, 'x');
      for (auto& c : s) c = static_cast<char>('a' + rng() % 26);
      return s;
    }
    case 6: {
      Bytes b(rng() % 20);
      for (auto& c : b) c = static_cast<std::uint8_t>(rng());
      return b;
    }
    default: {
      Array a(rng() % (rng() % 10 == 0 ? 20 : 5));
      for (auto& e : a) e = random_value(rng, depth + 1);
      return a;
    }
  }
}

MessageSchema test_schema() {
  return {"Probe",
          {{"id", FieldKind::unsigned_integer},
           {"label", FieldKind::text},
           {"ratio", FieldKind::real},
           {"note", FieldKind::text, true},
           {"items", FieldKind::array}}};
}

}  // namespace

TEST_CASE("djb2 golden vectors") {
  CHECK(djb2_hash("").value == 5381u);
  CHECK(djb2_hash("a").value == 177670u);
  CHECK(djb2_hash("/command").value == 2876070707u);
  CHECK(djb2_hash("/heartbeat").value == 3108837508u);
  CHECK(djb2_hash("/a2c/heartbeat").value == 2788472457u);
  CHECK(djb2_hash("/bidding").value == 1338802373u);
  static_assert(djb2_hash("a").value == 177670u);
}

TEST_CASE("djb2 agrees with the oracle on random strings") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10000; ++i) {
    std::string s(rng() % 64, '\0');
    for (auto& c : s) c = static_cast<char>(rng());
    REQUIRE(djb2_hash(s).value == djb2_oracle(s));
  }
}

TEST_CASE("msgpack bytes match the reference encoder") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 5000; ++i) {
    const Value v = random_value(rng, 0);
    const Bytes mine = pack(v);
    const auto ref = nlohmann::json::to_msgpack(to_json(v));
    REQUIRE(mine == Bytes(ref.begin(), ref.end()));
    std::size_t pos = 0;
    const Value back = unpack(mine, pos);
    CHECK(pos == mine.size());
    CHECK(back == v);
  }
}

TEST_CASE("msgpack float encoding") {
  CHECK(pack(Value(0.5)).size() == 5);
  CHECK(pack(Value(0.1)).size() == 9);
  CHECK(pack(Value(std::nan(""))).size() == 9);
  std::size_t pos = 0;
  const auto b = pack(Value(std::nan("")));
  CHECK(std::isnan(unpack(b, pos).as_real()));
}

TEST_CASE("msgpack reader rejects truncation, maps and excessive depth") {
  Bytes b = pack(Value(std::string(40, 'q')));
  b.pop_back();
  std::size_t pos = 0;
  CHECK_THROWS_AS(unpack(b, pos), MsgpackError);
  const Bytes map{0x81, 0x01, 0x02};
  pos = 0;
  CHECK_THROWS_AS(unpack(map, pos), MsgpackError);
  Bytes deep(100, 0x91);
  deep.push_back(0xc0);
  pos = 0;
  CHECK_THROWS_AS(unpack(deep, pos), MsgpackError);
  const Bytes reserved{0xc1};
  pos = 0;
  CHECK_THROWS_AS(unpack(reserved, pos), MsgpackError);
}

TEST_CASE("empty frame is the big-endian hash") {
  TopicTable t;
  t.register_topic("/heartbeat", MessageSchema{"Empty", {}});
  const auto bytes = encode_frame_bytes(t, "/heartbeat", {});
  const std::uint32_t h = djb2_hash("/heartbeat").value;
  REQUIRE(bytes.size() == 4);
  CHECK(bytes[0] == (h >> 24));
  CHECK(bytes[1] == ((h >> 16) & 0xff));
  CHECK(bytes[2] == ((h >> 8) & 0xff));
  CHECK(bytes[3] == (h & 0xff));
}

TEST_CASE("frame layout is hash then one value per field") {
  TopicTable t;
  t.register_topic("/probe", test_schema());
  const FieldList f{7u, "ab", 0.5, nullptr, Array{1, -1}};
  const auto bytes = encode_frame_bytes(t, "/probe", f);
  Bytes expected{};
  const auto h = djb2_hash("/probe").value;
  expected = {static_cast<std::uint8_t>(h >> 24), static_cast<std::uint8_t>(h >> 16), static_cast<std::uint8_t>(h >> 8),
              static_cast<std::uint8_t>(h)};
  for (const auto& v : f) {
    const auto e = nlohmann::json::to_msgpack(to_json(v));
    expected.insert(expected.end(), e.begin(), e.end());
  }
  CHECK(bytes == expected);
}

TEST_CASE("encode rejects unknown topics and schema mismatches") {
  TopicTable t;
  t.register_topic("/probe", test_schema());
  CHECK_THROWS_AS(encode_frame(t, "/nope", {}), CodecError);
  CHECK_THROWS_AS(encode_frame(t, "/probe", {7u, "ab"}), CodecError);
  CHECK_THROWS_AS(encode_frame(t, "/probe", {7u, 3, 0.5, nullptr, Array{}}), CodecError);
  CHECK_THROWS_AS(encode_frame(t, "/probe", {7u, "ab", 0.5, "x", nullptr}), CodecError);
  CHECK_NOTHROW(encode_frame(t, "/probe", {7u, "ab", 2, "x", Array{}}));
  CHECK_THROWS_AS(encode_frame(t, "/probe", {-7, "ab", 2, "x", Array{}}), CodecError);
}

TEST_CASE("registration rejects duplicates") {
  TopicTable t;
  t.register_topic("/probe", test_schema());
  CHECK_THROWS_AS(t.register_topic("/probe", test_schema()), CodecError);
  // "Aa" and "B@" collide under h*33+c: 65*33+97 == 66*33+64.
  t.register_topic("/Aa", test_schema());
  CHECK(djb2_hash("/Aa") == djb2_hash("/B@"));
  CHECK_THROWS_AS(t.register_topic("/B@", test_schema()), CodecError);
  CHECK(t.size() == 2);
}

TEST_CASE("decode drops unknown topics and counts errors") {
  TopicTable t;
  t.register_topic("/probe", test_schema());
  FrameDecoder dec(t);

  const auto good = encode_frame_bytes(t, "/probe", {7u, "ab", 0.5, nullptr, Array{}});
  auto msg = dec.decode(good);
  REQUIRE(msg);
  CHECK(msg->topic == "/probe");
  CHECK(msg->fields[1].as_text() == "ab");

  TopicTable other;
  other.register_topic("/other", test_schema());
  const auto foreign = encode_frame_bytes(other, "/other", {7u, "ab", 0.5, nullptr, Array{}});
  CHECK_FALSE(dec.decode(foreign));
  CHECK(dec.dropped_unknown() == 1);
  CHECK(decode_frame(foreign, t).status == DecodeStatus::unknown_topic);

  const Bytes three{1, 2, 3};
  CHECK(decode_frame(three, t).status == DecodeStatus::short_frame);
  CHECK_FALSE(dec.decode(three));
  CHECK(dec.decode_errors() == 1);

  auto truncated = good;
  truncated.pop_back();
  CHECK(decode_frame(truncated, t).status == DecodeStatus::malformed);
  auto trailing = good;
  trailing.push_back(0xc0);
  CHECK(decode_frame(trailing, t).status == DecodeStatus::malformed);
  CHECK_FALSE(dec.decode(truncated));
  CHECK(dec.decode_errors() == 2);
  CHECK(dec.dropped_unknown() == 1);
}

TEST_CASE("peek reads only the header") {
  const Bytes f{0x12, 0x34, 0x56, 0x78, 0xff};
  REQUIRE(peek_topic(f));
  CHECK(peek_topic(f)->value == 0x12345678u);
  CHECK_FALSE(peek_topic(std::span(f).first(3)));
}
