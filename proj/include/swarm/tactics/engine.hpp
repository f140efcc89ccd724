#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "swarm/alloc/auction.hpp"
#include "swarm/tactics/tactic.hpp"

namespace swarm::tactics {

/// Agent id 0 is never assigned; a job restricted to it matches nobody.
inline constexpr AgentId kNoAgent = 0;

struct Invocation {
  std::string definition;
  geom::Vec3 position{};
  msg::ParamList params;
  std::optional<std::vector<AgentId>> selection;
  AgentId c2 = 0;
  bool deferred = false;
};

enum class JobState { live, succeeded, failed };

struct Instance {
  InstanceView view;
  std::unique_ptr<Tactic> tactic;
  TacticState state = TacticState::pending;
  bool issued = false;
  AgentId c2 = 0;
  std::vector<InstanceId> parents;
  std::vector<InstanceId> children;
  std::vector<JobId> jobs;
  std::map<JobId, JobState> job_states;
  std::vector<std::pair<double, TacticState>> history;
  std::optional<std::string> error;
};

class TacticsEngine {
 public:
  explicit TacticsEngine(TacticRegistry registry);

  struct Output {
    std::vector<msg::Job> jobs;          // submit to the auctioneer
    std::vector<JobId> cancel_jobs;      // cancel through the auctioneer
    std::vector<msg::TacticStatus> statuses;
  };

  const TacticRegistry& registry() const { return registry_; }

  /// Validates parameters, resolves context by proximity and creates a
  /// pending instance. Throws TacticError.
  InstanceId invoke(const Invocation& inv, const TacticWorld& world, double now);
  /// Rejects self links, cycles, links into a started child and a second
  /// parent on a negation gate. Throws TacticError; the graph is unchanged.
  void link(InstanceId parent, InstanceId child);
  void unlink(InstanceId parent, InstanceId child);
  /// Releases the instance and every chain descendant.
  void issue(InstanceId root);
  /// Cancels the instance, its chain descendants and their live jobs.
  /// Terminal instances are left alone.
  void cancel(InstanceId id, double now);

  /// Request/reply for the C2 topic. Never throws; errors come back in the
  /// reply.
  msg::TacticStatus handle(const msg::TacticRequest& r, const TacticWorld& world, double now);

  void on_job_event(const alloc::JobEvent& e, const TacticWorld& world, double now);
  Output tick(const TacticWorld& world, double now);

  const Instance* find(InstanceId id) const;
  const std::map<InstanceId, Instance>& instances() const { return instances_; }
  bool reachable(InstanceId from, InstanceId to) const;

 private:
  Instance& get(InstanceId id);
  TacticContext context(Instance& inst, const TacticWorld& world, double now);
  void transition(Instance& inst, TacticState to, double now, std::optional<std::string> error = std::nullopt);
  void finish(Instance& inst, TacticState to, const TacticWorld* world, double now, std::optional<std::string> error = std::nullopt);
  std::optional<ContextRef> resolve_context(const TacticDefinition& def, geom::Vec3 pos, const TacticWorld& world) const;

  TacticRegistry registry_;
  std::map<InstanceId, Instance> instances_;
  std::map<JobId, InstanceId> job_owner_;
  InstanceId next_instance_ = 1;
  JobId next_job_ = 1;
  Output pending_;
};

}  // namespace swarm::tactics
