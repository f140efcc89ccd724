#include "swarm/tactics/tactic.hpp"

#include <algorithm>

namespace swarm::tactics {

std::string_view to_string(TacticState s) {
  switch (s) {
    case TacticState::pending: return "pending";
    case TacticState::in_progress: return "in_progress";
    case TacticState::failed: return "failed";
    case TacticState::completed: return "completed";
  }
  return "?";
}

std::string_view state_color(TacticState s) {
  switch (s) {
    case TacticState::pending: return "black";
    case TacticState::in_progress: return "blue";
    case TacticState::failed: return "red";
    case TacticState::completed: return "green";
  }
  return "?";
}

namespace {

const wire::Value& lookup(const msg::ParamList& params, std::string_view name) {
  for (const auto& [n, v] : params)
    if (n == name) return v;
  throw TacticError("missing parameter " + std::string(name));
}

}  // namespace

double InstanceView::real(std::string_view name) const { return lookup(params, name).as_real(); }
std::int64_t InstanceView::integer(std::string_view name) const { return lookup(params, name).as_int(); }
bool InstanceView::boolean(std::string_view name) const { return lookup(params, name).as_bool(); }

const geom::Sketch* TacticContext::context_sketch() const {
  if (!instance.context || instance.context->kind != ContextRef::Kind::sketch || world.sketches == nullptr)
    return nullptr;
  return world.sketches->find(instance.context->id);
}

const geom::Building* TacticContext::context_building() const {
  if (!instance.context || instance.context->kind != ContextRef::Kind::building) return nullptr;
  for (const auto& b : world.buildings)
    if (b.id == instance.context->id) return &b;
  return nullptr;
}

Readiness default_readiness(std::span<const TacticState> parents) {
  bool all_done = true;
  for (auto s : parents) {
    if (s == TacticState::failed) return Readiness::fail;
    if (s != TacticState::completed) all_done = false;
  }
  return all_done ? Readiness::start : Readiness::wait;
}

Readiness gate_readiness(GateKind gate, std::span<const TacticState> parents) {
  const auto n = static_cast<std::ptrdiff_t>(parents.size());
  const auto done = std::count(parents.begin(), parents.end(), TacticState::completed);
  const auto failed = std::count(parents.begin(), parents.end(), TacticState::failed);
  switch (gate) {
    case GateKind::none:
    case GateKind::timer:
      return default_readiness(parents);
    case GateKind::negation:
      if (n != 1) return Readiness::fail;
      if (failed == 1) return Readiness::complete;
      if (done == 1) return Readiness::fail;
      return Readiness::wait;
    case GateKind::conjunction:
      if (failed > 0) return Readiness::fail;
      return done == n ? Readiness::complete : Readiness::wait;
    case GateKind::disjunction:
      if (done > 0) return Readiness::complete;
      return failed == n ? Readiness::fail : Readiness::wait;
  }
  return Readiness::wait;
}

std::optional<TacticState> Tactic::poll(TacticContext&, const ChildSummary& c) {
  if (c.live > 0) return std::nullopt;
  if (c.total == 0) return TacticState::completed;
  return 2 * c.succeeded >= c.total ? TacticState::completed : TacticState::failed;
}

void TacticRegistry::add(TacticDefinition def, TacticFactory make) {
  if (find(def.name) != nullptr) throw TacticError("duplicate tactic definition: " + def.name);
  entries_.push_back({std::move(def), std::move(make)});
}

const RegisteredTactic* TacticRegistry::find(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.definition.name == name) return &e;
  return nullptr;
}

std::vector<TacticDefinition> TacticRegistry::definitions() const {
  std::vector<TacticDefinition> out;
  for (const auto& e : entries_) out.push_back(e.definition);
  return out;
}

}  // namespace swarm::tactics
