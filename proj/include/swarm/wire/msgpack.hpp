#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace swarm::wire {

using Bytes = std::vector<std::uint8_t>;

struct Value;
using Array = std::vector<Value>;

enum class ValueKind : std::uint8_t { nil, boolean, integer, unsigned_integer, real, text, binary, array };

/// One MessagePack-representable value. Maps are not part of the swarm
/// schemas and are rejected by the reader.
struct Value {
  using Storage = std::variant<std::monostate, bool, std::int64_t, std::uint64_t, double, std::string, Bytes, Array>;

  Storage data;

  Value() = default;
  Value(std::nullptr_t) {}
  Value(bool b) : data(b) {}
  Value(int v) : data(static_cast<std::int64_t>(v)) {}
  Value(long v) : data(static_cast<std::int64_t>(v)) {}
  Value(long long v) : data(static_cast<std::int64_t>(v)) {}
  Value(unsigned v) : data(static_cast<std::uint64_t>(v)) {}
  Value(unsigned long v) : data(static_cast<std::uint64_t>(v)) {}
  Value(unsigned long long v) : data(static_cast<std::uint64_t>(v)) {}
  Value(double v) : data(v) {}
  Value(const char* s) : data(std::string(s)) {}
  Value(std::string s) : data(std::move(s)) {}
  Value(Bytes b) : data(std::move(b)) {}
  Value(Array a) : data(std::move(a)) {}

  ValueKind kind() const { return static_cast<ValueKind>(data.index()); }
  bool is_nil() const { return kind() == ValueKind::nil; }
  /// True for both signed and unsigned integer storage.
  bool is_integer() const;
  bool is_number() const { return is_integer() || kind() == ValueKind::real; }

  bool as_bool() const;
  std::int64_t as_int() const;
  std::uint64_t as_uint() const;
  /// Accepts integer storage too.
  double as_real() const;
  const std::string& as_text() const;
  const Bytes& as_binary() const;
  const Array& as_array() const;

  /// Integers compare by numeric value regardless of signedness, so a value
  /// survives the positive-int normalisation done by the reader.
  friend bool operator==(const Value& a, const Value& b);
};

class MsgpackError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Appends the smallest MessagePack encoding of `v`. Reals that are exactly
/// representable as float32 use the 5-byte form.
void pack(const Value& v, Bytes& out);
Bytes pack(const Value& v);

/// Reads one value starting at `pos` and advances `pos` past it.
/// Non-negative integers come back as unsigned, negative ones as signed.
Value unpack(std::span<const std::uint8_t> in, std::size_t& pos);

}  // namespace swarm::wire
