#include "swarm/wire/msgpack.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

namespace swarm::wire {

namespace {

constexpr int kMaxDepth = 64;

void put_be(Bytes& out, std::uint64_t v, int width) {
  for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void pack_uint(std::uint64_t v, Bytes& out) {
  if (v <= 0x7f) {
    out.push_back(static_cast<std::uint8_t>(v));
  } else if (v <= 0xff) {
    out.push_back(0xcc);
    put_be(out, v, 1);
  } else if (v <= 0xffff) {
    out.push_back(0xcd);
    put_be(out, v, 2);
  } else if (v <= 0xffffffffULL) {
    out.push_back(0xce);
    put_be(out, v, 4);
  } else {
    out.push_back(0xcf);
    put_be(out, v, 8);
  }
}

void pack_int(std::int64_t v, Bytes& out) {
  if (v >= 0) {
    pack_uint(static_cast<std::uint64_t>(v), out);
    return;
  }
  const auto u = static_cast<std::uint64_t>(v);
  if (v >= -32) {
    out.push_back(static_cast<std::uint8_t>(u & 0xff));
  } else if (v >= std::numeric_limits<std::int8_t>::min()) {
    out.push_back(0xd0);
    put_be(out, u, 1);
  } else if (v >= std::numeric_limits<std::int16_t>::min()) {
    out.push_back(0xd1);
    put_be(out, u, 2);
  } else if (v >= std::numeric_limits<std::int32_t>::min()) {
    out.push_back(0xd2);
    put_be(out, u, 4);
  } else {
    out.push_back(0xd3);
    put_be(out, u, 8);
  }
}

void pack_real(double d, Bytes& out) {
  // NaN and infinities fail the range test and use float64.
  const bool fits_float = d >= static_cast<double>(std::numeric_limits<float>::lowest()) &&
                          d <= static_cast<double>(std::numeric_limits<float>::max()) &&
                          static_cast<double>(static_cast<float>(d)) == d;
  if (fits_float) {
    const auto f = static_cast<float>(d);
    out.push_back(0xca);
    put_be(out, std::bit_cast<std::uint32_t>(f), 4);
  } else {
    out.push_back(0xcb);
    put_be(out, std::bit_cast<std::uint64_t>(d), 8);
  }
}

void pack_length(std::size_t n, std::uint8_t fix_base, std::size_t fix_max, std::uint8_t op8, std::uint8_t op16,
                 std::uint8_t op32, Bytes& out) {
  if (fix_max > 0 && n <= fix_max) {
    out.push_back(static_cast<std::uint8_t>(fix_base | n));
  } else if (op8 != 0 && n <= 0xff) {
    out.push_back(op8);
    put_be(out, n, 1);
  } else if (n <= 0xffff) {
    out.push_back(op16);
    put_be(out, n, 2);
  } else if (n <= 0xffffffffULL) {
    out.push_back(op32);
    put_be(out, n, 4);
  } else {
    throw MsgpackError("msgpack: container too large");
  }
}

void pack_into(const Value& v, Bytes& out, int depth) {
  if (depth > kMaxDepth) throw MsgpackError("msgpack: nesting too deep");
  switch (v.kind()) {
    case ValueKind::nil:
      out.push_back(0xc0);
      break;
    case ValueKind::boolean:
      out.push_back(std::get<bool>(v.data) ? 0xc3 : 0xc2);
      break;
    case ValueKind::integer:
      pack_int(std::get<std::int64_t>(v.data), out);
      break;
    case ValueKind::unsigned_integer:
      pack_uint(std::get<std::uint64_t>(v.data), out);
      break;
    case ValueKind::real:
      pack_real(std::get<double>(v.data), out);
      break;
    case ValueKind::text: {
      const auto& s = std::get<std::string>(v.data);
      pack_length(s.size(), 0xa0, 31, 0xd9, 0xda, 0xdb, out);
      out.insert(out.end(), s.begin(), s.end());
      break;
    }
    case ValueKind::binary: {
      const auto& b = std::get<Bytes>(v.data);
      pack_length(b.size(), 0, 0, 0xc4, 0xc5, 0xc6, out);
      out.insert(out.end(), b.begin(), b.end());
      break;
    }
    case ValueKind::array: {
      const auto& a = std::get<Array>(v.data);
      pack_length(a.size(), 0x90, 15, 0, 0xdc, 0xdd, out);
      for (const auto& e : a) pack_into(e, out, depth + 1);
      break;
    }
  }
}

class Reader {
 public:
  Reader(std::span<const std::uint8_t> in, std::size_t& pos) : in_(in), pos_(pos) {}

  Value read(int depth) {
    if (depth > kMaxDepth) throw MsgpackError("msgpack: nesting too deep");
    const std::uint8_t tag = byte();
    if (tag <= 0x7f) return Value(static_cast<std::uint64_t>(tag));
    if (tag >= 0xe0) return Value(static_cast<std::int64_t>(static_cast<std::int8_t>(tag)));
    if ((tag & 0xe0) == 0xa0) return text(tag & 0x1f);
    if ((tag & 0xf0) == 0x90) return array(tag & 0x0f, depth);
    switch (tag) {
      case 0xc0: return Value();
      case 0xc2: return Value(false);
      case 0xc3: return Value(true);
      case 0xcc: return Value(be(1));
      case 0xcd: return Value(be(2));
      case 0xce: return Value(be(4));
      case 0xcf: return Value(be(8));
      case 0xd0: return Value(static_cast<std::int64_t>(static_cast<std::int8_t>(be(1))));
      case 0xd1: return Value(static_cast<std::int64_t>(static_cast<std::int16_t>(be(2))));
      case 0xd2: return Value(static_cast<std::int64_t>(static_cast<std::int32_t>(be(4))));
      case 0xd3: return signed64();
      case 0xca: return Value(static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(be(4)))));
      case 0xcb: return Value(std::bit_cast<double>(be(8)));
      case 0xd9: return text(be(1));
      case 0xda: return text(be(2));
      case 0xdb: return text(be(4));
      case 0xc4: return binary(be(1));
      case 0xc5: return binary(be(2));
      case 0xc6: return binary(be(4));
      case 0xdc: return array(be(2), depth);
      case 0xdd: return array(be(4), depth);
      default:
        throw MsgpackError("msgpack: unsupported type tag 0x" + hex(tag));
    }
  }

 private:
  static std::string hex(std::uint8_t b) {
    static constexpr char digits[] = "0123456789abcdef";
    return {digits[b >> 4], digits[b & 0xf]};
  }

  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw MsgpackError("msgpack: truncated input");
  }

  std::uint8_t byte() {
    need(1);
    return in_[pos_++];
  }

  std::uint64_t be(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v = (v << 8) | in_[pos_++];
    return v;
  }

  Value signed64() {
    const auto u = be(8);
    return Value(static_cast<std::int64_t>(u));
  }

  Value text(std::uint64_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return Value(std::move(s));
  }

  Value binary(std::uint64_t n) {
    need(n);
    Bytes b(in_.begin() + static_cast<std::ptrdiff_t>(pos_), in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return Value(std::move(b));
  }

  Value array(std::uint64_t n, int depth) {
    // Every element takes at least one byte; reject impossible counts before allocating.
    need(n);
    Array a;
    a.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) a.push_back(read(depth + 1));
    return Value(std::move(a));
  }

  std::span<const std::uint8_t> in_;
  std::size_t& pos_;
};

}  // namespace

bool Value::is_integer() const {
  return kind() == ValueKind::integer || kind() == ValueKind::unsigned_integer;
}

bool Value::as_bool() const {
  if (const auto* b = std::get_if<bool>(&data)) return *b;
  throw std::invalid_argument("value is not a boolean");
}

std::int64_t Value::as_int() const {
  if (const auto* i = std::get_if<std::int64_t>(&data)) return *i;
  if (const auto* u = std::get_if<std::uint64_t>(&data)) {
    if (*u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      throw std::out_of_range("unsigned value exceeds int64");
    return static_cast<std::int64_t>(*u);
  }
  throw std::invalid_argument("value is not an integer");
}

std::uint64_t Value::as_uint() const {
  if (const auto* u = std::get_if<std::uint64_t>(&data)) return *u;
  if (const auto* i = std::get_if<std::int64_t>(&data)) {
    if (*i < 0) throw std::out_of_range("negative value for unsigned field");
    return static_cast<std::uint64_t>(*i);
  }
  throw std::invalid_argument("value is not an integer");
}

double Value::as_real() const {
  if (const auto* d = std::get_if<double>(&data)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&data)) return static_cast<double>(*i);
  if (const auto* u = std::get_if<std::uint64_t>(&data)) return static_cast<double>(*u);
  throw std::invalid_argument("value is not a number");
}

const std::string& Value::as_text() const {
  if (const auto* s = std::get_if<std::string>(&data)) return *s;
  throw std::invalid_argument("value is not text");
}

const Bytes& Value::as_binary() const {
  if (const auto* b = std::get_if<Bytes>(&data)) return *b;
  throw std::invalid_argument("value is not binary");
}

const Array& Value::as_array() const {
  if (const auto* a = std::get_if<Array>(&data)) return *a;
  throw std::invalid_argument("value is not an array");
}

bool operator==(const Value& a, const Value& b) {
  if (a.is_integer() && b.is_integer()) {
    const bool a_neg = a.kind() == ValueKind::integer && std::get<std::int64_t>(a.data) < 0;
    const bool b_neg = b.kind() == ValueKind::integer && std::get<std::int64_t>(b.data) < 0;
    if (a_neg != b_neg) return false;
    if (a_neg) return std::get<std::int64_t>(a.data) == std::get<std::int64_t>(b.data);
    return a.as_uint() == b.as_uint();
  }
  if (a.kind() == ValueKind::real && b.kind() == ValueKind::real) {
    const double x = std::get<double>(a.data);
    const double y = std::get<double>(b.data);
    return x == y || (std::isnan(x) && std::isnan(y));
  }
  return a.data == b.data;
}

void pack(const Value& v, Bytes& out) { pack_into(v, out, 0); }

Bytes pack(const Value& v) {
  Bytes out;
  pack(v, out);
  return out;
}

Value unpack(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos > in.size()) throw MsgpackError("msgpack: read position past end");
  Reader r(in, pos);
  return r.read(0);
}

}  // namespace swarm::wire
