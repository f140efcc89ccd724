#include "swarm/sim/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <spdlog/spdlog.h>

#include "swarm/plan/jps.hpp"

namespace swarm::sim {

double cruise_speed(PlatformKind k) {
  switch (k) {
    case PlatformKind::quad: return kQuadSpeed;
    case PlatformKind::ugv: return kUgvSpeed;
    case PlatformKind::vtol: return kVtolSpeed;
    case PlatformKind::c2: return 0.0;
  }
  return 0.0;
}

double endurance(PlatformKind k) {
  switch (k) {
    case PlatformKind::quad: return kQuadEndurance;
    case PlatformKind::ugv: return kUgvEndurance;
    case PlatformKind::vtol: return kVtolEndurance;
    case PlatformKind::c2: return 0.0;
  }
  return 0.0;
}

const char* to_string(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::move_to: return "move_to";
    case PrimitiveKind::waypoints: return "waypoints";
    case PrimitiveKind::hold: return "hold";
    case PrimitiveKind::orbit: return "orbit";
    case PrimitiveKind::land: return "land";
  }
  return "?";
}

void advance_artifacts(std::span<Artifact> artifacts, double now) {
  constexpr double radius = 5.0, speed = 0.5;
  for (auto& a : artifacts) {
    if (!a.dynamic) continue;
    const double th = now * speed / radius + a.id;
    a.position = {a.anchor.x + radius * std::cos(th), a.anchor.y + radius * std::sin(th), a.anchor.z};
  }
}

Agent::Agent(AgentState s) : s_(std::move(s)) {
  if (s_.fidelity != 1 && s_.fidelity != 2) throw SimError("unsupported fidelity level");
  s_.position = clamp_altitude(s_.position);
}

bool Agent::airborne() const { return msg::is_air(s_.platform) && s_.position.z > 1e-6; }

std::optional<JobId> Agent::current_job() const {
  if (!s_.primitive) return std::nullopt;
  return s_.primitive->job;
}

Vec3 Agent::clamp_altitude(Vec3 p) const {
  if (s_.platform == PlatformKind::ugv) p.z = 0.0;
  else if (s_.platform == PlatformKind::quad) p.z = std::clamp(p.z, 0.0, kQuadCeiling);
  else p.z = std::max(p.z, 0.0);
  return p;
}

msg::Bid Agent::bid(const msg::Job& job) {
  offered_[job.job_id] = job;
  alloc::BidInputs in;
  in.agent = s_.id;
  in.position = s_.position;
  in.battery = s_.battery;
  in.health.critical = low_battery_;
  in.platform = s_.platform;
  in.payload = s_.payload;
  in.status = s_.status;
  return {job.job_id, s_.id, alloc::compute_bid(in, job)};
}

void Agent::on_command(const msg::Cmd& cmd) {
  if (auto cur = current_job()) {
    if (std::find(cmd.cancellations.begin(), cmd.cancellations.end(), *cur) != cmd.cancellations.end()) {
      s_.primitive.reset();
      if (s_.status == msg::AgentStatus::tasked) s_.status = msg::AgentStatus::idle;
      if (airborne() && s_.platform == PlatformKind::vtol) enter_loiter();
    }
  }
  for (JobId j : cmd.cancellations) offered_.erase(j);
  for (const auto& [job, agent] : cmd.assignments) {
    auto it = offered_.find(job);
    if (agent != s_.id) {
      if (it != offered_.end()) offered_.erase(it);
      continue;
    }
    if (it == offered_.end()) {
      spdlog::warn("agent {}: assigned unknown job {}", s_.id, job);
      results_.push_back({job, s_.id, msg::TaskOutcome::failed});
      continue;
    }
    const msg::Job j = std::move(it->second);
    offered_.erase(it);
    if (!start_job(j)) results_.push_back({job, s_.id, msg::TaskOutcome::failed});
  }
}

bool Agent::start_job(const msg::Job& job) {
  if (!alive() || s_.status == msg::AgentStatus::disabled || low_battery_) return false;
  if (current_job()) return false;
  Primitive p;
  p.job = job.job_id;
  for (const auto& w : job.waypoints) p.waypoints.push_back(clamp_altitude(w));
  p.hold_s = std::max(0.0, job.param_real("hold_s", 0.0));
  if (const auto* f = job.param("face")) p.face = msg::vec3_from(*f);
  if (const auto* l = job.param("land")) p.land = l->as_bool() && msg::is_air(s_.platform);
  if (p.waypoints.empty()) p.waypoints.push_back(s_.position);
  if (p.land && p.waypoints.back().z > 0.0) p.waypoints.push_back({p.waypoints.back().x, p.waypoints.back().y, 0.0});
  p.kind = p.land ? PrimitiveKind::land
           : p.hold_s > 0.0 ? PrimitiveKind::hold
           : p.waypoints.size() == 1 ? PrimitiveKind::move_to
                                     : PrimitiveKind::waypoints;
  s_.status = msg::AgentStatus::tasked;
  begin(std::move(p));
  return true;
}

void Agent::begin(Primitive p) {
  s_.primitive = std::move(p);
  leg_.clear();
  leg_valid_ = false;
}

void Agent::finish_job(msg::TaskOutcome outcome) {
  if (s_.primitive && s_.primitive->job) results_.push_back({*s_.primitive->job, s_.id, outcome});
  s_.primitive.reset();
  leg_.clear();
  leg_valid_ = false;
  if (s_.status == msg::AgentStatus::tasked) s_.status = msg::AgentStatus::idle;
  if (airborne() && s_.platform == PlatformKind::vtol) enter_loiter();
}

void Agent::enter_loiter() {
  Primitive p;
  p.kind = PrimitiveKind::orbit;
  const double h = s_.heading;
  p.orbit_centre = {s_.position.x - kVtolLoiterRadius * std::sin(h), s_.position.y + kVtolLoiterRadius * std::cos(h)};
  p.orbit_angle = h - std::numbers::pi / 2.0;
  begin(std::move(p));
}

void Agent::loiter(double dt) {
  auto& p = *s_.primitive;
  const double v = cruise_speed(s_.platform);
  p.orbit_angle += v / kVtolLoiterRadius * dt;
  s_.position.x = p.orbit_centre.x + kVtolLoiterRadius * std::cos(p.orbit_angle);
  s_.position.y = p.orbit_centre.y + kVtolLoiterRadius * std::sin(p.orbit_angle);
  s_.heading = p.orbit_angle + std::numbers::pi / 2.0;
  s_.velocity = {v * std::cos(s_.heading), v * std::sin(s_.heading), 0.0};
}

void Agent::trigger_safe_land(const StepEnv& env) {
  low_battery_ = true;
  if (auto job = current_job()) results_.push_back({*job, s_.id, msg::TaskOutcome::failed});
  std::optional<Vec2> site;
  if (env.landing_site) site = env.landing_site(s_.position.xy());
  const Vec2 t = site.value_or(s_.position.xy());
  Primitive p;
  p.kind = PrimitiveKind::land;
  p.land = true;
  p.safe_land = true;
  p.waypoints = {{t.x, t.y, s_.position.z}, {t.x, t.y, 0.0}};
  s_.status = msg::AgentStatus::tasked;
  begin(std::move(p));
  spdlog::debug("agent {}: battery {:.2f}, landing at ({:.1f}, {:.1f})", s_.id, s_.battery, t.x, t.y);
}

void Agent::step(double dt, double, const StepEnv& env) {
  hover_ = false;
  if (pending_fidelity_) {
    s_.fidelity = static_cast<std::uint8_t>(*pending_fidelity_);
    s_.config_hash = pending_hash_;
    pending_fidelity_.reset();
    leg_.clear();
    leg_valid_ = false;
  }
  if (!alive()) {
    s_.velocity = {};
    return;
  }
  const bool active = airborne() || s_.status == msg::AgentStatus::tasked;
  const double rate = 1.0 / endurance(s_.platform) * (active ? 1.0 : kIdleDrainFactor);
  s_.battery = std::max(0.0, s_.battery - rate * dt);
  if (s_.status == msg::AgentStatus::disabled) {
    s_.velocity = {};
    return;
  }
  if (msg::is_air(s_.platform) && airborne() && s_.battery <= kSafeLandBattery && !low_battery_)
    trigger_safe_land(env);
  advance(dt, env);
}

void Agent::plan_leg(const StepEnv& env) {
  leg_.clear();
  leg_valid_ = true;
  if (s_.fidelity != 2) return;
  auto& p = *s_.primitive;
  const Vec3 w = p.waypoints[p.next];
  const auto layer =
      s_.platform == PlatformKind::ugv ? plan::Layer::ground : plan::layer_for(false, std::max(w.z, s_.position.z));
  const auto* grid = env.grids[static_cast<std::size_t>(layer)];
  if (grid == nullptr) return;
  // Vertical legs (take-off, landing) need no plan.
  if (geom::distance(s_.position.xy(), w.xy()) < grid->cell_size()) return;
  try {
    auto path = plan::jps_plan(*grid, layer, s_.position.xy(), w.xy());
    if (!path) {
      spdlog::debug("agent {}: waypoint ({:.1f}, {:.1f}) unreachable", s_.id, w.x, w.y);
      finish_job(msg::TaskOutcome::failed);
      return;
    }
    for (std::size_t i = 1; i < path->waypoints.size(); ++i)
      leg_.push_back({path->waypoints[i].x, path->waypoints[i].y, w.z});
    if (!leg_.empty() && geom::distance(leg_.back().xy(), w.xy()) < 1e-9) leg_.back() = w;
  } catch (const plan::PlanError&) {
    leg_.clear();  // off the map: straight line
  }
}

void Agent::move_toward(Vec3 target, double dt, bool stop_at_target, bool& reached) {
  if (s_.platform == PlatformKind::vtol) {
    move_vtol(target, dt, reached);
    return;
  }
  const Vec3 d = target - s_.position;
  const double dist = geom::norm(d);
  const double cruise = cruise_speed(s_.platform);
  reached = false;
  if (dist < 1e-9) {
    reached = true;
    if (stop_at_target) s_.velocity = {};
    return;
  }
  const Vec3 dir = d * (1.0 / dist);
  double speed = cruise;
  if (s_.fidelity == 2) {
    double want = cruise;
    if (stop_at_target) want = std::min(want, std::sqrt(2.0 * kMaxAccel * dist));
    const double cur = geom::norm(s_.velocity);
    speed = cur + std::clamp(want - cur, -kMaxAccel * dt, kMaxAccel * dt);
  }
  if (dist <= speed * dt) {
    s_.position = target;
    reached = true;
    s_.velocity = stop_at_target ? Vec3{} : dir * speed;
  } else {
    s_.position = s_.position + dir * (speed * dt);
    s_.velocity = dir * speed;
  }
  if (std::hypot(dir.x, dir.y) > 1e-9) s_.heading = std::atan2(dir.y, dir.x);
}

// Fixed-wing flight: ground speed never drops below the minimum while
// travelling; altitude changes ride along, and a leg with nothing left
// horizontally is flown as a vertical hover transition.
void Agent::move_vtol(Vec3 target, double dt, bool& reached) {
  const Vec2 dh = target.xy() - s_.position.xy();
  const double h = geom::norm(dh);
  const double dz = target.z - s_.position.z;
  double speed = kVtolSpeed;
  if (s_.fidelity == 2) {
    const double cur = std::hypot(s_.velocity.x, s_.velocity.y);
    speed = std::max(kVtolMinSpeed, cur + std::clamp(kVtolSpeed - cur, -kMaxAccel * dt, kMaxAccel * dt));
  }
  const double step = speed * dt;
  reached = false;
  if (h <= step) {
    if (h > 1e-9) {
      s_.heading = std::atan2(dh.y, dh.x);
      s_.velocity = {speed * std::cos(s_.heading), speed * std::sin(s_.heading), 0.0};
    }
    s_.position.x = target.x;
    s_.position.y = target.y;
    if (std::abs(dz) <= step) {
      s_.position.z = target.z;
      reached = true;
      if (h <= 1e-9 && std::abs(dz) > 1e-9) {
        s_.velocity = {0.0, 0.0, dz / dt};
        hover_ = true;
      }
    } else {
      s_.position.z += std::copysign(step, dz);
      s_.velocity = {0.0, 0.0, std::copysign(speed, dz)};
      hover_ = true;
    }
    return;
  }
  const Vec2 dir = dh * (1.0 / h);
  const double vz = std::clamp(dz * speed / h, -speed, speed);
  s_.position = {s_.position.x + dir.x * step, s_.position.y + dir.y * step, s_.position.z + vz * dt};
  s_.velocity = {dir.x * speed, dir.y * speed, vz};
  s_.heading = std::atan2(dir.y, dir.x);
}

void Agent::advance(double dt, const StepEnv& env) {
  if (!s_.primitive) {
    if (airborne() && s_.platform == PlatformKind::vtol) {
      enter_loiter();
      loiter(dt);
    } else {
      s_.velocity = {};
    }
    return;
  }
  if (s_.primitive->kind == PrimitiveKind::orbit) {
    loiter(dt);
    return;
  }
  auto& p = *s_.primitive;
  if (p.next < p.waypoints.size()) {
    if (!leg_valid_) {
      plan_leg(env);
      if (!s_.primitive) return;
    }
    const bool last_wp = p.next + 1 == p.waypoints.size();
    const Vec3 target = leg_.empty() ? p.waypoints[p.next] : leg_.front();
    const bool final_point = last_wp && leg_.size() <= 1;
    bool reached = false;
    move_toward(target, dt, final_point, reached);
    if (reached) {
      if (!leg_.empty()) leg_.erase(leg_.begin());
      if (leg_.empty()) {
        ++p.next;
        leg_valid_ = false;
      }
    }
    if (p.next < p.waypoints.size()) return;
  }
  if (p.land) {
    s_.velocity = {};
    if (p.safe_land) {
      s_.primitive.reset();
      s_.status = msg::AgentStatus::disabled;
    } else {
      finish_job(msg::TaskOutcome::succeeded);
    }
    return;
  }
  if (p.held < p.hold_s - 1e-9) {
    if (p.face) {
      const Vec2 f = p.face->xy() - s_.position.xy();
      if (geom::norm(f) > 1e-9 && s_.platform != PlatformKind::vtol) s_.heading = std::atan2(f.y, f.x);
    }
    if (s_.platform == PlatformKind::vtol && airborne()) {
      if (p.held == 0.0) {
        const double h = s_.heading;
        p.orbit_centre = {s_.position.x - kVtolLoiterRadius * std::sin(h), s_.position.y + kVtolLoiterRadius * std::cos(h)};
        p.orbit_angle = h - std::numbers::pi / 2.0;
      }
      p.held += dt;
      loiter(dt);
    } else {
      p.held += dt;
      s_.velocity = {};
    }
    if (p.held < p.hold_s - 1e-9) return;
  }
  finish_job(msg::TaskOutcome::succeeded);
}

std::vector<msg::Detection> Agent::sense(std::span<const Artifact> artifacts, std::span<const geom::Building> buildings,
                                         double now) {
  std::vector<msg::Detection> out;
  if (!alive()) return out;
  for (const auto& a : artifacts) {
    const double d = geom::ground_distance(s_.position, a.position);
    if (d > kOuterRange) continue;
    const bool need_outer = !reported_.contains({a.id, 0});
    const bool need_inner = d <= kInnerRange && !reported_.contains({a.id, 1});
    if (!need_outer && !need_inner) continue;
    if (geom::occluded(buildings, s_.position, a.position, true)) continue;
    if (need_outer) {
      reported_.insert({a.id, 0});
      out.push_back({s_.id, a.outer_id, std::nullopt, msg::recognized_class(a.role), a.position, now});
    }
    if (need_inner) {
      reported_.insert({a.id, 1});
      out.push_back({s_.id, a.outer_id, a.inner_id, a.role, a.position, now});
    }
  }
  return out;
}

void Agent::set_fidelity(int level, std::uint32_t config_hash) {
  if (level != 1 && level != 2) throw SimError("unsupported fidelity level " + std::to_string(level));
  if (level == s_.fidelity && config_hash == s_.config_hash) {
    pending_fidelity_.reset();
    return;
  }
  pending_fidelity_ = level;
  pending_hash_ = config_hash;
}

void Agent::kill(double now) {
  if (!alive()) return;
  if (auto job = current_job()) results_.push_back({*job, s_.id, msg::TaskOutcome::failed});
  s_.primitive.reset();
  s_.status = msg::AgentStatus::killed;
  s_.velocity = {};
  s_.position.z = 0.0;
  killed_at_ = now;
}

bool Agent::emergency_stop() {
  if (!msg::is_air(s_.platform) || !alive()) return false;
  const bool changed = s_.status != msg::AgentStatus::disabled || airborne();
  s_.position.z = 0.0;
  s_.velocity = {};
  s_.primitive.reset();
  leg_.clear();
  s_.status = msg::AgentStatus::disabled;
  return changed;
}

std::optional<msg::Heartbeat> Agent::heartbeat(double now) const {
  if (killed_at_ && now - *killed_at_ > kDeathRattleS) return std::nullopt;
  msg::Heartbeat h;
  h.agent_id = s_.id;
  h.platform = s_.platform;
  h.position = s_.position;
  h.battery = s_.battery;
  h.status = s_.status;
  h.task_id = current_job();
  h.payload = s_.payload;
  h.fidelity = s_.fidelity;
  h.config_hash = s_.config_hash;
  return h;
}

std::vector<msg::TaskResult> Agent::take_results() {
  std::vector<msg::TaskResult> out;
  out.swap(results_);
  return out;
}

std::vector<AgentId> field_node_effects(std::span<Agent> agents, std::span<const FieldNode> nodes, double now) {
  std::vector<AgentId> killed;
  for (auto& a : agents) {
    if (!a.alive()) continue;
    for (const auto& n : nodes) {
      if (n.neutralized || n.effect != NodeEffect::disable_agent) continue;
      if (geom::distance(a.state().position, n.position) > n.radius) continue;
      if (n.countered_by && a.state().payload == *n.countered_by) continue;
      a.kill(now);
      killed.push_back(a.id());
      break;
    }
  }
  return killed;
}

}  // namespace swarm::sim
