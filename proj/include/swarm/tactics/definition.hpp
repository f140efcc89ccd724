#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swarm/geom/sketch.hpp"
#include "swarm/msg/messages.hpp"

namespace swarm::tactics {

class TacticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ParamDataType { real, integer, boolean, text };
std::string_view to_string(ParamDataType t);  // float, int, bool, text
ParamDataType parse_data_type(std::string_view s);

struct ParamSpec {
  std::string name;
  std::string description;
  ParamDataType type = ParamDataType::real;
  wire::Value default_value;
};

enum class GateKind { none, negation, conjunction, disjunction, timer };

/// Everything C2 needs to offer a tactic.
struct TacticDefinition {
  std::string name;   // invocation key, e.g. "overhead_scan"
  std::string title;  // "Overhead Scan"
  std::string description;
  std::string gesture;
  /// Sketch type names or "building"; empty means no context.
  std::vector<std::string> contexts;
  std::vector<ParamSpec> params;
  GateKind gate = GateKind::none;

  const ParamSpec* param(std::string_view n) const;
};

/// Schema check: unknown names and wrong types throw TacticError; missing
/// parameters take their defaults. Integers are accepted for float
/// parameters and stored as reals.
msg::ParamList validate_params(const TacticDefinition& def, const msg::ParamList& given);

/// Wire form carried by TacticDefs: one array per tactic definition followed
/// by one per sketch parameter type.
wire::Array encode_definitions(std::span<const TacticDefinition> defs, const geom::ParamTypeRegistry& types);
struct DecodedDefinitions {
  std::vector<TacticDefinition> tactics;
  std::vector<geom::ParamType> sketch_types;
};
DecodedDefinitions decode_definitions(const wire::Array& a);

/// Markdown tactic table: name, gesture, parameter, type, description.
std::string documentation_table(std::span<const TacticDefinition> defs);

}  // namespace swarm::tactics
