#include "swarm/tactics/definition.hpp"

#include <set>
#include <sstream>

namespace swarm::tactics {

using wire::Array;
using wire::Value;

std::string_view to_string(ParamDataType t) {
  switch (t) {
    case ParamDataType::real: return "float";
    case ParamDataType::integer: return "int";
    case ParamDataType::boolean: return "bool";
    case ParamDataType::text: return "text";
  }
  return "?";
}

ParamDataType parse_data_type(std::string_view s) {
  if (s == "float") return ParamDataType::real;
  if (s == "int") return ParamDataType::integer;
  if (s == "bool") return ParamDataType::boolean;
  if (s == "text") return ParamDataType::text;
  throw TacticError("unknown parameter data type: " + std::string(s));
}

const ParamSpec* TacticDefinition::param(std::string_view n) const {
  for (const auto& p : params)
    if (p.name == n) return &p;
  return nullptr;
}

namespace {

std::optional<Value> coerce(const ParamSpec& spec, const Value& v) {
  switch (spec.type) {
    case ParamDataType::real:
      if (v.is_number()) return Value(v.as_real());
      return std::nullopt;
    case ParamDataType::integer:
      if (v.is_integer()) return Value(v.as_int());
      return std::nullopt;
    case ParamDataType::boolean:
      if (v.kind() == wire::ValueKind::boolean) return v;
      return std::nullopt;
    case ParamDataType::text:
      if (v.kind() == wire::ValueKind::text) return v;
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

msg::ParamList validate_params(const TacticDefinition& def, const msg::ParamList& given) {
  std::set<std::string> seen;
  for (const auto& [name, value] : given) {
    const auto* spec = def.param(name);
    if (spec == nullptr) throw TacticError(def.name + ": unknown parameter '" + name + "'");
    if (!seen.insert(name).second) throw TacticError(def.name + ": parameter '" + name + "' given twice");
    if (!coerce(*spec, value))
      throw TacticError(def.name + ": parameter '" + name + "' must be " + std::string(to_string(spec->type)));
  }
  msg::ParamList out;
  for (const auto& spec : def.params) {
    const Value* v = &spec.default_value;
    for (const auto& [name, value] : given)
      if (name == spec.name) v = &value;
    out.emplace_back(spec.name, *coerce(spec, *v));
  }
  return out;
}

wire::Array encode_definitions(std::span<const TacticDefinition> defs, const geom::ParamTypeRegistry& types) {
  Array out;
  for (const auto& d : defs) {
    Array contexts(d.contexts.begin(), d.contexts.end());
    Array params;
    for (const auto& p : d.params)
      params.push_back(Array{p.name, p.description, std::string(to_string(p.type)), p.default_value});
    out.push_back(Array{"tactic", d.name, d.title, d.description, d.gesture, std::move(contexts), std::move(params),
                        static_cast<std::uint64_t>(d.gate)});
  }
  for (const auto& [name, t] : types.types())
    out.push_back(Array{"sketch_type", t.type_name, static_cast<std::uint64_t>(t.type_id),
                        t.kind == geom::SketchKind::point ? "point" : "polyline", t.command, t.closed, t.no_go, t.color,
                        t.line_width});
  return out;
}

DecodedDefinitions decode_definitions(const wire::Array& a) {
  DecodedDefinitions out;
  try {
    for (const auto& e : a) {
      const auto& f = e.as_array();
      if (f.empty()) throw TacticError("empty definition entry");
      const auto& tag = f.at(0).as_text();
      if (tag == "tactic") {
        TacticDefinition d;
        d.name = f.at(1).as_text();
        d.title = f.at(2).as_text();
        d.description = f.at(3).as_text();
        d.gesture = f.at(4).as_text();
        for (const auto& c : f.at(5).as_array()) d.contexts.push_back(c.as_text());
        for (const auto& p : f.at(6).as_array()) {
          const auto& pf = p.as_array();
          d.params.push_back({pf.at(0).as_text(), pf.at(1).as_text(), parse_data_type(pf.at(2).as_text()), pf.at(3)});
        }
        const auto gate = f.at(7).as_uint();
        if (gate > static_cast<std::uint64_t>(GateKind::timer)) throw TacticError("bad gate kind");
        d.gate = static_cast<GateKind>(gate);
        out.tactics.push_back(std::move(d));
      } else if (tag == "sketch_type") {
        geom::ParamType t;
        t.type_name = f.at(1).as_text();
        t.type_id = static_cast<std::uint32_t>(f.at(2).as_uint());
        t.kind = f.at(3).as_text() == "point" ? geom::SketchKind::point : geom::SketchKind::polyline;
        t.command = f.at(4).as_text();
        t.closed = f.at(5).as_bool();
        t.no_go = f.at(6).as_bool();
        t.color = f.at(7).as_text();
        t.line_width = f.at(8).as_real();
        out.sketch_types.push_back(std::move(t));
      } else {
        throw TacticError("unknown definition entry: " + tag);
      }
    }
  } catch (const std::out_of_range&) {
    throw TacticError("truncated definition entry");
  } catch (const wire::MsgpackError& e) {
    throw TacticError(std::string("malformed definition entry: ") + e.what());
  }
  return out;
}

namespace {

std::string render_default(const ParamSpec& p) {
  const auto& v = p.default_value;
  switch (v.kind()) {
    case wire::ValueKind::boolean: return v.as_bool() ? "true" : "false";
    case wire::ValueKind::integer:
    case wire::ValueKind::unsigned_integer: return std::to_string(v.as_int());
    case wire::ValueKind::real: {
      std::ostringstream s;
      s << v.as_real();
      return s.str();
    }
    case wire::ValueKind::text: return v.as_text();
    default: return "";
  }
}

}  // namespace

std::string documentation_table(std::span<const TacticDefinition> defs) {
  std::ostringstream out;
  out << "| Tactic | Gesture | Parameter | Type | Default | Description |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& d : defs) {
    std::string ctx;
    for (const auto& c : d.contexts) ctx += (ctx.empty() ? "" : " or ") + c;
    out << "| " << d.title << " | " << d.gesture << " | Context | " << (ctx.empty() ? "None" : ctx) << " | | "
        << d.description << " |\n";
    for (const auto& p : d.params)
      out << "| | | " << p.name << " | " << to_string(p.type) << " | " << render_default(p) << " | " << p.description
          << " |\n";
  }
  return out.str();
}

}  // namespace swarm::tactics
