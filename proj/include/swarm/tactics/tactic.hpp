#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "swarm/geom/scene.hpp"
#include "swarm/geom/sketch.hpp"
#include "swarm/msg/agent_table.hpp"
#include "swarm/plan/grid.hpp"
#include "swarm/tactics/definition.hpp"

namespace swarm::tactics {

using msg::AgentId;
using msg::InstanceId;
using msg::JobId;

enum class TacticState { pending, in_progress, failed, completed };
std::string_view to_string(TacticState s);
/// pending black, in progress blue, failed red, completed green.
std::string_view state_color(TacticState s);
inline bool terminal(TacticState s) { return s == TacticState::failed || s == TacticState::completed; }

/// Read-only view of the mission the server hands to tactics each tick.
struct TacticWorld {
  const geom::SketchDatabase* sketches = nullptr;
  std::span<const geom::Building> buildings;
  const plan::OccupancyGrid* ground_grid = nullptr;
  const msg::AgentTable* agents = nullptr;
  /// Positions claimed by landing agents, so safe-land picks distinct spots.
  std::span<const geom::Vec2> occupied;
  std::function<void(geom::BuildingId)> confirm_building;
};

struct ContextRef {
  enum class Kind { sketch, building } kind = Kind::sketch;
  std::uint64_t id = 0;
  friend bool operator==(const ContextRef&, const ContextRef&) = default;
};

/// A child job before the engine stamps ids, provenance and selection on it.
struct TaskSpec {
  std::string primitive = "follow_waypoints";
  std::vector<geom::Vec3> waypoints;
  msg::ParamList params;
  std::vector<msg::PlatformKind> platforms;
  std::vector<msg::PayloadKind> payloads;
  std::vector<AgentId> selection;  // narrows the instance selection further
};

struct InstanceView {
  InstanceId id = 0;
  const TacticDefinition* definition = nullptr;
  geom::Vec3 position{};
  msg::ParamList params;
  std::optional<ContextRef> context;
  std::optional<std::vector<AgentId>> selection;

  double real(std::string_view name) const;
  std::int64_t integer(std::string_view name) const;
  bool boolean(std::string_view name) const;
};

class TacticContext {
 public:
  TacticContext(const TacticWorld& world, const InstanceView& inst, double now, std::function<JobId(TaskSpec)> queue)
      : world(world), instance(inst), now(now), queue_(std::move(queue)) {}

  const TacticWorld& world;
  const InstanceView& instance;
  double now;

  JobId queue(TaskSpec spec) { return queue_(std::move(spec)); }

  const geom::Sketch* context_sketch() const;
  const geom::Building* context_building() const;

 private:
  std::function<JobId(TaskSpec)> queue_;
};

enum class Readiness { wait, start, complete, fail };

/// Default rule: fail on any failed parent, start once all completed.
Readiness default_readiness(std::span<const TacticState> parents);
Readiness gate_readiness(GateKind gate, std::span<const TacticState> parents);

struct ChildSummary {
  int total = 0;
  int live = 0;
  int succeeded = 0;
  int failed = 0;
};

/// Base for tactic behaviour. Built-ins override a subset; every hook has a
/// default.
class Tactic {
 public:
  virtual ~Tactic() = default;

  virtual Readiness prerequisites(std::span<const TacticState> parents) const { return default_readiness(parents); }
  /// Queue the initial children. Throwing TacticError fails the instance.
  virtual void start(TacticContext& ctx) = 0;

  virtual void on_bid_complete(TacticContext&, JobId, AgentId) {}
  virtual void on_bidding_failure(TacticContext&, JobId) {}
  virtual void on_task_complete(TacticContext&, JobId, AgentId) {}
  virtual void on_task_cancelled(TacticContext&, JobId) {}
  virtual void on_task_failure(TacticContext&, JobId) {}

  /// Called every tick while in progress; a value ends the instance.
  /// Default: done when no children are live, completed when at least half
  /// succeeded (or none were spawned).
  virtual std::optional<TacticState> poll(TacticContext& ctx, const ChildSummary& children);
  virtual void on_finished(TacticContext&, TacticState) {}
};

using TacticFactory = std::function<std::unique_ptr<Tactic>()>;

struct RegisteredTactic {
  TacticDefinition definition;
  TacticFactory make;
};

class TacticRegistry {
 public:
  /// Throws TacticError on a duplicate name.
  void add(TacticDefinition def, TacticFactory make);
  const RegisteredTactic* find(std::string_view name) const;
  std::vector<TacticDefinition> definitions() const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<RegisteredTactic> entries_;
};

}  // namespace swarm::tactics
