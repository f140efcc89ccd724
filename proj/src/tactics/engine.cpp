#include "swarm/tactics/engine.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace swarm::tactics {

TacticsEngine::TacticsEngine(TacticRegistry registry) : registry_(std::move(registry)) {}

Instance& TacticsEngine::get(InstanceId id) {
  auto it = instances_.find(id);
  if (it == instances_.end()) throw TacticError("unknown tactic instance " + std::to_string(id));
  return it->second;
}

const Instance* TacticsEngine::find(InstanceId id) const {
  auto it = instances_.find(id);
  return it == instances_.end() ? nullptr : &it->second;
}

std::optional<ContextRef> TacticsEngine::resolve_context(const TacticDefinition& def, geom::Vec3 pos,
                                                         const TacticWorld& world) const {
  if (def.contexts.empty()) return std::nullopt;
  std::vector<std::string> sketch_types;
  bool buildings = false;
  for (const auto& c : def.contexts) {
    if (c == "building") buildings = true;
    else sketch_types.push_back(c);
  }
  std::optional<ContextRef> best;
  double best_d = std::numeric_limits<double>::infinity();
  if (world.sketches != nullptr && !sketch_types.empty()) {
    if (auto id = world.sketches->closest(pos.xy(), sketch_types)) {
      best = ContextRef{ContextRef::Kind::sketch, *id};
      best_d = geom::sketch_distance(*world.sketches->find(*id), pos.xy());
    }
  }
  if (buildings)
    for (const auto& b : world.buildings) {
      const double d = geom::building_distance(b, pos.xy());
      if (d < best_d) {
        best_d = d;
        best = ContextRef{ContextRef::Kind::building, b.id};
      }
    }
  if (!best) {
    std::string want;
    for (const auto& c : def.contexts) want += (want.empty() ? "" : " or ") + c;
    throw TacticError(def.name + ": no " + want + " context in the scene");
  }
  return best;
}

InstanceId TacticsEngine::invoke(const Invocation& inv, const TacticWorld& world, double now) {
  const auto* reg = registry_.find(inv.definition);
  if (reg == nullptr) throw TacticError("unknown tactic: " + inv.definition);
  if (!geom::finite(inv.position)) throw TacticError(inv.definition + ": invocation position is not finite");
  Instance inst;
  inst.view.definition = &reg->definition;
  inst.view.position = inv.position;
  inst.view.params = validate_params(reg->definition, inv.params);
  inst.view.context = resolve_context(reg->definition, inv.position, world);
  inst.view.selection = inv.selection;
  inst.c2 = inv.c2;
  inst.tactic = reg->make();
  const InstanceId id = next_instance_++;
  inst.view.id = id;
  inst.history.emplace_back(now, TacticState::pending);
  inst.issued = !inv.deferred;
  auto [it, ok] = instances_.emplace(id, std::move(inst));
  pending_.statuses.push_back({0, it->second.c2, id, reg->definition.name, "pending", std::nullopt, {}});
  return id;
}

bool TacticsEngine::reachable(InstanceId from, InstanceId to) const {
  std::vector<InstanceId> stack{from};
  std::set<InstanceId> seen;
  while (!stack.empty()) {
    const InstanceId cur = stack.back();
    stack.pop_back();
    if (cur == to) return true;
    if (!seen.insert(cur).second) continue;
    if (const auto* i = find(cur))
      for (InstanceId c : i->children) stack.push_back(c);
  }
  return false;
}

void TacticsEngine::link(InstanceId parent, InstanceId child) {
  Instance& p = get(parent);
  Instance& c = get(child);
  if (parent == child) throw TacticError("cannot link a tactic to itself");
  if (std::find(p.children.begin(), p.children.end(), child) != p.children.end())
    throw TacticError("link already exists");
  if (reachable(child, parent)) throw TacticError("link would create a cycle");
  if (c.state != TacticState::pending) throw TacticError("child tactic has already started");
  if (c.view.definition->gate == GateKind::negation && !c.parents.empty())
    throw TacticError("negation takes exactly one parent");
  p.children.push_back(child);
  c.parents.push_back(parent);
}

void TacticsEngine::unlink(InstanceId parent, InstanceId child) {
  Instance& p = get(parent);
  Instance& c = get(child);
  std::erase(p.children, child);
  std::erase(c.parents, parent);
}

void TacticsEngine::issue(InstanceId root) {
  get(root);
  std::vector<InstanceId> stack{root};
  while (!stack.empty()) {
    Instance& i = get(stack.back());
    stack.pop_back();
    if (i.issued && i.view.id != root) continue;
    i.issued = true;
    for (InstanceId c : i.children) stack.push_back(c);
  }
}

void TacticsEngine::transition(Instance& inst, TacticState to, double now, std::optional<std::string> error) {
  if (inst.state == to || terminal(inst.state)) return;
  if (terminal(to) && inst.state == TacticState::pending) transition(inst, TacticState::in_progress, now);
  inst.state = to;
  inst.history.emplace_back(now, to);
  if (error) inst.error = error;
  msg::TacticStatus s;
  s.c2_id = inst.c2;
  s.instance_id = inst.view.id;
  s.definition = inst.view.definition->name;
  s.status = std::string(to_string(to));
  s.error = inst.error;
  s.children = inst.jobs;
  pending_.statuses.push_back(std::move(s));
}

void TacticsEngine::finish(Instance& inst, TacticState to, const TacticWorld* world, double now,
                           std::optional<std::string> error) {
  if (terminal(inst.state)) return;
  for (auto& [job, st] : inst.job_states)
    if (st == JobState::live) {
      st = JobState::failed;
      pending_.cancel_jobs.push_back(job);
    }
  transition(inst, to, now, std::move(error));
  if (world != nullptr) {
    auto ctx = context(inst, *world, now);
    inst.tactic->on_finished(ctx, to);
  }
}

void TacticsEngine::cancel(InstanceId id, double now) {
  Instance& root = get(id);
  if (terminal(root.state)) return;
  std::vector<InstanceId> order{id};
  std::set<InstanceId> seen;
  while (!order.empty()) {
    const InstanceId cur = order.back();
    order.pop_back();
    if (!seen.insert(cur).second) continue;
    Instance& i = get(cur);
    finish(i, TacticState::failed, nullptr, now, "cancelled");
    for (InstanceId c : i.children) order.push_back(c);
  }
}

TacticContext TacticsEngine::context(Instance& inst, const TacticWorld& world, double now) {
  Instance* ip = &inst;
  return TacticContext(world, inst.view, now, [this, ip](TaskSpec spec) {
    msg::Job j;
    j.job_id = next_job_++;
    j.tactic_id = ip->view.id;
    j.primitive = std::move(spec.primitive);
    j.waypoints = std::move(spec.waypoints);
    j.params = std::move(spec.params);
    j.platforms = std::move(spec.platforms);
    j.payloads = std::move(spec.payloads);
    if (ip->view.selection && !spec.selection.empty()) {
      for (AgentId a : spec.selection)
        if (std::find(ip->view.selection->begin(), ip->view.selection->end(), a) != ip->view.selection->end())
          j.selection.push_back(a);
      if (j.selection.empty()) j.selection.push_back(kNoAgent);
    } else if (ip->view.selection) {
      j.selection = *ip->view.selection;
      if (j.selection.empty()) j.selection.push_back(kNoAgent);
    } else {
      j.selection = std::move(spec.selection);
    }
    ip->jobs.push_back(j.job_id);
    ip->job_states[j.job_id] = JobState::live;
    job_owner_[j.job_id] = ip->view.id;
    pending_.jobs.push_back(j);
    return j.job_id;
  });
}

void TacticsEngine::on_job_event(const alloc::JobEvent& e, const TacticWorld& world, double now) {
  auto owner = job_owner_.find(e.job);
  if (owner == job_owner_.end()) return;
  Instance& inst = get(owner->second);
  if (inst.state != TacticState::in_progress) return;
  auto& st = inst.job_states.at(e.job);
  if (st != JobState::live) return;
  auto ctx = context(inst, world, now);
  try {
    switch (e.kind) {
      case alloc::JobEventKind::assigned:
        inst.tactic->on_bid_complete(ctx, e.job, e.agent);
        break;
      case alloc::JobEventKind::unassignable:
        st = JobState::failed;
        inst.tactic->on_bidding_failure(ctx, e.job);
        break;
      case alloc::JobEventKind::succeeded:
        st = JobState::succeeded;
        inst.tactic->on_task_complete(ctx, e.job, e.agent);
        break;
      case alloc::JobEventKind::failed:
        st = JobState::failed;
        inst.tactic->on_task_failure(ctx, e.job);
        break;
      case alloc::JobEventKind::cancelled:
        st = JobState::failed;
        inst.tactic->on_task_cancelled(ctx, e.job);
        break;
    }
  } catch (const TacticError& err) {
    finish(inst, TacticState::failed, &world, now, err.what());
  }
}

TacticsEngine::Output TacticsEngine::tick(const TacticWorld& world, double now) {
  // Resolve to a fixed point so zero-delay gates and timers settle in one tick.
  for (bool changed = true; changed;) {
    changed = false;
    for (auto& [id, inst] : instances_) {
      if (inst.state == TacticState::pending && inst.issued) {
        std::vector<TacticState> parents;
        for (InstanceId p : inst.parents) parents.push_back(get(p).state);
        const auto r = inst.tactic->prerequisites(parents);
        if (r == Readiness::wait) continue;
        changed = true;
        if (r == Readiness::fail) {
          finish(inst, TacticState::failed, &world, now, inst.parents.empty() ? "invalid gate configuration" : "prerequisite failed");
          continue;
        }
        if (r == Readiness::complete) {
          finish(inst, TacticState::completed, &world, now);
          continue;
        }
        transition(inst, TacticState::in_progress, now);
        auto ctx = context(inst, world, now);
        try {
          inst.tactic->start(ctx);
        } catch (const TacticError& err) {
          finish(inst, TacticState::failed, &world, now, err.what());
          continue;
        }
        // Children spawned at start belong in the status message.
        pending_.statuses.back().children = inst.jobs;
      }
      if (inst.state == TacticState::in_progress) {
        ChildSummary c;
        for (const auto& [job, st] : inst.job_states) {
          ++c.total;
          if (st == JobState::live) ++c.live;
          if (st == JobState::succeeded) ++c.succeeded;
          if (st == JobState::failed) ++c.failed;
        }
        auto ctx = context(inst, world, now);
        std::optional<TacticState> done;
        try {
          done = inst.tactic->poll(ctx, c);
        } catch (const TacticError& err) {
          finish(inst, TacticState::failed, &world, now, err.what());
          changed = true;
          continue;
        }
        if (done && terminal(*done)) {
          finish(inst, *done, &world, now,
                 *done == TacticState::failed && c.total > 0
                     ? std::optional<std::string>(std::to_string(c.succeeded) + " of " + std::to_string(c.total) +
                                                  " tasks succeeded")
                     : std::nullopt);
          changed = true;
        }
      }
    }
  }
  Output out = std::move(pending_);
  pending_ = Output{};
  return out;
}

msg::TacticStatus TacticsEngine::handle(const msg::TacticRequest& r, const TacticWorld& world, double now) {
  msg::TacticStatus reply;
  reply.request_id = r.request_id;
  reply.c2_id = r.c2_id;
  reply.definition = r.definition;
  try {
    auto need = [](const std::optional<InstanceId>& v, const char* what) {
      if (!v) throw TacticError(std::string("request is missing ") + what);
      return *v;
    };
    InstanceId target = 0;
    if (r.op == "invoke") {
      target = invoke({r.definition, r.position, r.params, r.selection, r.c2_id, r.deferred}, world, now);
    } else if (r.op == "link") {
      link(need(r.ref_a, "parent"), need(r.ref_b, "child"));
      target = *r.ref_b;
    } else if (r.op == "unlink") {
      unlink(need(r.ref_a, "parent"), need(r.ref_b, "child"));
      target = *r.ref_b;
    } else if (r.op == "issue") {
      target = need(r.ref_a, "instance");
      issue(target);
    } else if (r.op == "cancel") {
      target = need(r.ref_a, "instance");
      cancel(target, now);
    } else {
      throw TacticError("unknown tactic op: " + r.op);
    }
    const Instance& inst = get(target);
    reply.instance_id = target;
    reply.definition = inst.view.definition->name;
    reply.status = std::string(to_string(inst.state));
    reply.error = inst.error;
    reply.children = inst.jobs;
  } catch (const TacticError& e) {
    reply.status = "error";
    reply.error = e.what();
  }
  return reply;
}

}  // namespace swarm::tactics
