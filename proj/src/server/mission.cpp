#include "swarm/server/mission.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "swarm/server/console.hpp"
#include "swarm/tactics/library.hpp"

namespace swarm::server {

using nlohmann::json;
using net::TransportClass;

namespace {

template <class T>
bool is_topic(std::span<const std::uint8_t> frame) {
  static const wire::TopicHash h = wire::djb2_hash(T::kTopic);
  auto t = wire::peek_topic(frame);
  return t && *t == h;
}

std::vector<Vec3> vertices_of(const geom::Sketch& s) {
  if (const auto* p = std::get_if<geom::SketchPoint>(&s)) return {p->position};
  return std::get<geom::SketchPolyline>(s).vertices;
}

bool closed_of(const geom::Sketch& s) {
  const auto* l = std::get_if<geom::SketchPolyline>(&s);
  return l && l->closed;
}

}  // namespace

Mission::Mission(Scenario scenario, std::string scenario_text, std::uint64_t seed)
    : scenario_(std::move(scenario)),
      scenario_text_(std::move(scenario_text)),
      seed_(seed),
      engine_(tactics::builtin_tactics()),
      buildings_(scenario_.buildings) {
  net::LinkModel link{scenario_.network.loss_prob, scenario_.network.hop_latency_s,
                      scenario_.network.seed.value_or(seed_)};
  mesh_ = std::make_unique<net::MeshNetwork>(link);
  artifacts_ = scenario_.artifacts;
  field_nodes_ = scenario_.field_nodes;

  json header = {{"seed", seed_}, {"scenario", scenario_text_}};
  log_.append_text(RecordKind::header, 0, header.dump());

  add_node(kServerNode, scenario_.base, net::StartPolicy::from_zero);
  for (const auto& spec : scenario_.c2) {
    c2_.emplace_back(spec, scenario_.sketches);
    add_node(spec.id, spec.position, net::StartPolicy::from_zero);
  }
  for (const auto& sk : scenario_.sketches) {
    try {
      sketches_.create(sk.type_name, sk.vertices);
    } catch (const std::exception& e) {
      throw ScenarioError("sketch '" + (sk.ref.empty() ? sk.type_name : sk.ref) + "': " + e.what());
    }
  }
  for (const auto& r : scenario_.roster) spawn(r, 0);
  rebuild_grid();
}

std::unique_ptr<Mission> Mission::from_text(const std::string& text, std::optional<std::uint64_t> seed) {
  Scenario s = parse_scenario_text(text);
  std::uint64_t sd = seed.value_or(s.seed);
  return std::make_unique<Mission>(std::move(s), text, sd);
}

const sim::Agent* Mission::agent(AgentId id) const {
  if (id == 0 || id > agents_.size()) return nullptr;
  return &agents_[id - 1];
}

Mission::Node& Mission::add_node(net::NodeId id, Vec3 position, net::StartPolicy policy) {
  if (node_index_.contains(id)) throw ScenarioError("duplicate node id " + std::to_string(id));
  mesh_->add_node({id, position, scenario_.network.radio_range_m, true});
  mesh_->join(id, kSwarmGroup);
  net::ReliableParams params;
  params.tick_interval_s = kTickS;
  auto n = std::make_unique<Node>();
  n->id = id;
  n->endpoint = std::make_unique<net::MulticastEndpoint>(id, *mesh_, params, policy);
  n->endpoint->join(kSwarmGroup);
  node_index_[id] = nodes_.size();
  nodes_.push_back(std::move(n));
  return *nodes_.back();
}

void Mission::spawn(const RosterEntry& entry, std::uint64_t tick_of_spawn) {
  if (entry.count <= 0) return;
  int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(entry.count))));
  Vec2 corner = entry.spawn - Vec2{(cols - 1) * entry.spacing / 2.0, (cols - 1) * entry.spacing / 2.0};
  for (int i = 0; i < entry.count; ++i) {
    AgentId id = static_cast<AgentId>(agents_.size() + 1);
    if (id >= kServerNode) throw ScenarioError("too many agents");
    sim::AgentState s;
    s.id = id;
    s.platform = entry.platform;
    s.payload = entry.payload;
    s.position = Vec3{corner.x + (i % cols) * entry.spacing, corner.y + (i / cols) * entry.spacing, 0.0};
    s.fidelity = 1;
    agents_.emplace_back(s);
    if (entry.fidelity != 1) agents_.back().set_fidelity(entry.fidelity, 0);
    last_status_.push_back(s.status);
    next_heartbeat_[id] = tick_of_spawn;
    add_node(id, s.position, tick_of_spawn == 0 ? net::StartPolicy::from_zero : net::StartPolicy::from_first_observed);
  }
}

void Mission::send(net::NodeId from, TransportClass t, const wire::Bytes& frame) {
  node(from).endpoint->send(kSwarmGroup, t, frame, now());
}

void Mission::record_frame(net::NodeId from, const wire::Bytes& frame) {
  wire::Bytes p;
  for (int i = 3; i >= 0; --i) p.push_back(static_cast<std::uint8_t>(from >> (8 * i)));
  p.insert(p.end(), frame.begin(), frame.end());
  log_.append(RecordKind::frame, tick_, std::move(p));
}

void Mission::record_event(const json& e) { log_.append_text(RecordKind::event, tick_, e.dump()); }

void Mission::submit(const json& command) {
  validate_command(command);
  inputs_.push_back(command);
}

void Mission::apply_inputs() {
  while (script_next_ < scenario_.script.size() && scenario_.script[script_next_].at <= now() + 1e-9) {
    const json& cmd = scenario_.script[script_next_++].command;
    try {
      validate_command(cmd);
      apply(cmd);
    } catch (const std::exception& e) {
      ++stats_.rejected_inputs;
      stats_.input_errors.push_back(std::string("script: ") + e.what());
    }
  }
  while (!inputs_.empty()) {
    json cmd = std::move(inputs_.front());
    inputs_.pop_front();
    log_.append_text(RecordKind::input, tick_, cmd.dump());
    try {
      apply(cmd);
    } catch (const std::exception& e) {
      ++stats_.rejected_inputs;
      stats_.input_errors.push_back(e.what());
    }
  }
}

void Mission::apply(const json& cmd) {
  const std::string type = cmd["type"].get<std::string>();
  if (type == "estop") {
    apply_estop();
  } else if (type == "spawn") {
    RosterEntry e;
    auto platform = msg::parse_platform(cmd["platform"].get<std::string>());
    if (!platform || *platform == msg::PlatformKind::c2) throw CommandError("spawn: unknown platform");
    e.platform = *platform;
    auto payload = msg::parse_payload(cmd.value("payload", std::string("none")));
    if (!payload) throw CommandError("spawn: unknown payload");
    e.payload = *payload;
    e.count = cmd["count"].get<int>();
    e.spawn = vec3_from_json(cmd["position"], "spawn.position").xy();
    e.spacing = cmd.value("spacing", 3.0);
    spawn(e, tick_);
    record_event({{"event", "spawn"}, {"platform", msg::to_string(e.platform)}, {"count", e.count}});
  } else if (type == "fidelity") {
    apply_fidelity(cmd);
  } else {
    std::size_t target = 0;
    if (cmd.contains("c2")) {
      AgentId want = cmd["c2"].get<AgentId>();
      while (target < c2_.size() && c2_[target].id() != want) ++target;
      if (target == c2_.size()) throw CommandError("no C2 instance " + std::to_string(want));
    }
    c2_.at(target).command(cmd);
  }
}

void Mission::set_partitioned(bool partitioned) {
  if (partitioned) {
    mesh_->set_hop_filter([](net::NodeId, net::NodeId, net::Protocol, const wire::Bytes&) { return true; });
  } else {
    mesh_->set_hop_filter({});
  }
}

void Mission::apply_estop() {
  // Out-of-band channel: no mesh, no loss, takes effect this tick.
  int changed = 0;
  for (auto& a : agents_) {
    if (!a.emergency_stop()) continue;
    ++changed;
    auctioneer_.fail_without_retry(a.id(), now());
  }
  record_event({{"event", "estop"}, {"agents", changed}});
}

void Mission::apply_fidelity(const json& cmd) {
  int level = cmd["level"].get<int>();
  std::uint32_t hash = cmd.value("config_hash", 0u);
  if (cmd["agent"].is_string()) {
    for (auto& a : agents_) a.set_fidelity(level, hash);
  } else {
    AgentId id = cmd["agent"].get<AgentId>();
    if (id == 0 || id > agents_.size()) throw CommandError("fidelity: unknown agent " + std::to_string(id));
    agents_[id - 1].set_fidelity(level, hash);
  }
  record_event({{"event", "fidelity"}, {"agent", cmd["agent"]}, {"level", level}});
}

tactics::TacticWorld Mission::world() {
  tactics::TacticWorld w;
  w.sketches = &sketches_;
  w.buildings = scenario_.buildings;
  w.ground_grid = &grid_;
  w.agents = &table_;
  w.occupied = landing_claims_;
  w.confirm_building = [this](geom::BuildingId id) {
    if (auto st = buildings_.confirm(id)) record_event({{"event", "building"}, {"id", id}, {"confirmed", true}});
  };
  return w;
}

std::optional<Vec2> Mission::landing_site(Vec2 from) {
  auto site = tactics::landing_site(world(), from, landing_claims_);
  if (site) landing_claims_.push_back(*site);
  return site;
}

void Mission::rebuild_grid() {
  std::vector<plan::BuildingFootprint> footprints;
  for (const auto& b : scenario_.buildings) footprints.push_back({b.footprint, b.height});
  std::vector<plan::NoGoShape> zones;
  for (const auto& [id, s] : sketches_.all()) {
    const auto* type = sketches_.registry().find(geom::sketch_type(s));
    if (!type || !type->no_go) continue;
    zones.push_back({geom::to_2d(vertices_of(s)), closed_of(s), no_go_layers(type->type_name)});
  }
  grid_ = plan::rasterize(scenario_.bounds, footprints, zones);
}

void Mission::tick() {
  if (log_.finished()) throw std::logic_error("mission already finished");
  apply_inputs();
  phase_agents();
  phase_network();
  phase_allocation();
  phase_tactics();
  check_assignments();
  ++tick_;
  if (tick_ % kTicksPerSecond == 0) stats_.detection_curve.push_back(store_.size());
}

void Mission::run_ticks(std::uint64_t n) {
  for (std::uint64_t i = 0; i < n; ++i) tick();
}

void Mission::finish() { log_.finish(tick_); }

void Mission::phase_agents() {
  const double t = now();
  sim::StepEnv env;
  env.grids = {&grid_, &grid_, &grid_};
  env.landing_site = [this](Vec2 p) { return landing_site(p); };
  sim::advance_artifacts(artifacts_, t);

  for (std::size_t i = 0; i < agents_.size(); ++i) {
    sim::Agent& a = agents_[i];
    const AgentId id = a.id();
    Node& n = node(id);
    std::vector<net::ReceivedFrame> inbox = std::move(n.inbox);
    n.inbox.clear();
    for (const auto& f : inbox) {
      if (is_topic<msg::Job>(f.frame)) {
        auto in = decoder_.decode(f.frame);
        if (!in) continue;
        msg::Bid bid = a.bid(std::get<msg::Job>(in->message));
        send(id, TransportClass::reliable, msg::encode(bid));
      } else if (is_topic<msg::Cmd>(f.frame)) {
        auto in = decoder_.decode(f.frame);
        if (in) a.on_command(std::get<msg::Cmd>(in->message));
      }
    }

    a.step(kTickS, t, env);
    for (const auto& r : a.take_results()) send(id, TransportClass::reliable, msg::encode(r));
    for (const auto& d : a.sense(artifacts_, scenario_.buildings, t)) {
      wire::Bytes frame = msg::encode(d);
      record_frame(id, frame);
      send(id, TransportClass::reliable, frame);
    }
    auto hb_due = next_heartbeat_.find(id);
    if (tick_ >= hb_due->second) {
      hb_due->second = tick_ + kTicksPerSecond;
      if (auto hb = a.heartbeat(t)) {
        send(id, TransportClass::unreliable, msg::encode(*hb));
      } else {
        mesh_->set_alive(id, false);
      }
    }
    mesh_->set_position(id, a.state().position);
    if (a.alive() && (tick_ + id) % kTicksPerSecond == 0) {
      coverage_.stamp(a.state().position, coverage::kSensorRadius, t, scenario_.buildings);
    }
  }

  for (AgentId killed : sim::field_node_effects(agents_, field_nodes_, t)) {
    record_event({{"event", "killed"}, {"agent", killed}});
  }
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    msg::AgentStatus s = agents_[i].state().status;
    if (s != last_status_[i]) {
      record_event({{"event", "status"}, {"agent", agents_[i].id()}, {"status", msg::to_string(s)}});
      last_status_[i] = s;
    }
  }

  for (auto& c2 : c2_) {
    Node& n = node(c2.id());
    std::vector<net::ReceivedFrame> inbox = std::move(n.inbox);
    n.inbox.clear();
    for (const auto& f : inbox) {
      if (auto in = decoder_.decode(f.frame)) c2.on_message(in->message, t);
    }
    for (const auto& frame : c2.flush(t)) send(n.id, TransportClass::reliable, frame);
    if ((tick_ + c2.id()) % kTicksPerSecond == 0) {
      send(n.id, TransportClass::unreliable, msg::encode(c2.heartbeat(), msg::Heartbeat::kC2Topic));
    }
  }
}

void Mission::phase_network() {
  const double t = now();
  for (auto& n : nodes_) {
    auto frames = n->endpoint->tick(t);
    n->inbox.insert(n->inbox.end(), std::make_move_iterator(frames.begin()), std::make_move_iterator(frames.end()));
  }
  for (const auto& d : mesh_->step_until(t + kTickS)) {
    Node& n = node(d.node);
    auto frames = n.endpoint->on_delivery(d);
    n.inbox.insert(n.inbox.end(), std::make_move_iterator(frames.begin()), std::make_move_iterator(frames.end()));
  }
}

void Mission::greet_c2(AgentId c2) {
  msg::TacticDefs defs;
  defs.c2_id = c2;
  auto list = engine_.registry().definitions();
  defs.definitions = tactics::encode_definitions(list, sketches_.registry());
  send(kServerNode, TransportClass::reliable, msg::encode(defs));
  for (const auto& [id, s] : sketches_.all()) {
    msg::SketchUpdate u;
    u.c2_id = c2;
    u.op = "create";
    u.sketch_id = id;
    u.type_name = geom::sketch_type(s);
    u.vertices = vertices_of(s);
    u.closed = closed_of(s);
    send(kServerNode, TransportClass::reliable, msg::encode(u));
  }
  record_event({{"event", "c2_discovered"}, {"c2", c2}});
}

void Mission::phase_allocation() {
  const double t = now();
  Node& server = node(kServerNode);
  std::vector<net::ReceivedFrame> inbox = std::move(server.inbox);
  server.inbox.clear();
  for (const auto& f : inbox) {
    auto in = decoder_.decode(f.frame);
    if (!in) continue;
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, msg::Heartbeat>) {
            if (m.platform == msg::PlatformKind::c2) {
              if (c2_table_.ingest_heartbeat(m, t)) greet_c2(m.agent_id);
            } else {
              table_.ingest_heartbeat(m, t);
            }
          } else if constexpr (std::is_same_v<T, msg::Bid>) {
            auctioneer_.on_bid(m, t);
          } else if constexpr (std::is_same_v<T, msg::TaskResult>) {
            auctioneer_.on_task_result(m, t);
          } else if constexpr (std::is_same_v<T, msg::Detection>) {
            ++stats_.detection_reports;
            store_.ingest_detection(m);
            for (const auto& st : buildings_.update(m)) {
              record_event({{"event", "building"},
                            {"id", st.id},
                            {"confirmed", st.confirmed},
                            {"threat", st.contains_threat},
                            {"intel", st.contains_intel}});
            }
          } else if constexpr (std::is_same_v<T, msg::TacticRequest>) {
            pending_requests_.push_back(m);
          } else if constexpr (std::is_same_v<T, msg::SketchUpdate>) {
            pending_sketches_.push_back(m);
          }
        },
        in->message);
  }

  std::vector<AgentId> lost;
  for (const auto& [agent, job] : auctioneer_.assigned()) {
    const msg::AgentEntry* e = table_.find(agent);
    if (!e || table_.is_stale(agent, t) || e->last.status == msg::AgentStatus::killed ||
        e->last.status == msg::AgentStatus::disabled) {
      lost.push_back(agent);
    }
  }
  for (AgentId a : lost) auctioneer_.on_agent_lost(a, t);

  alloc::Auctioneer::Output out = auctioneer_.tick(t, table_);
  // The Cmd goes first: it may cancel a job that is being re-broadcast.
  if (!out.command.assignments.empty() || !out.command.cancellations.empty()) {
    wire::Bytes frame = msg::encode(out.command);
    record_frame(kServerNode, frame);
    send(kServerNode, TransportClass::reliable, frame);
    ++stats_.commands_sent;
    for (const auto& [job, agent] : out.command.assignments) stats_.assigned_agents.insert(agent);
  }
  for (const auto& job : out.broadcast) send(kServerNode, TransportClass::reliable, msg::encode(job));
  tactics::TacticWorld w = world();
  for (const auto& e : out.events) {
    record_event({{"event", "job"}, {"kind", alloc::to_string(e.kind)}, {"job", e.job}, {"agent", e.agent}});
    engine_.on_job_event(e, w, t);
  }
}

void Mission::handle_sketch_update(const msg::SketchUpdate& u) {
  msg::SketchUpdate echo = u;
  bool no_go = false;
  try {
    if (u.op == "create") {
      echo.sketch_id = sketches_.create(u.type_name, u.vertices);
    } else if (u.op == "modify") {
      if (!u.sketch_id) throw CommandError("modify without a sketch id");
      if (const auto* s = sketches_.find(*u.sketch_id)) {
        const auto* type = sketches_.registry().find(geom::sketch_type(*s));
        no_go = type && type->no_go;
      }
      sketches_.modify(*u.sketch_id, u.vertices);
    } else if (u.op == "delete") {
      if (!u.sketch_id) throw CommandError("delete without a sketch id");
      const auto* s = sketches_.find(*u.sketch_id);
      if (!s) throw CommandError("unknown sketch " + std::to_string(*u.sketch_id));
      echo.type_name = geom::sketch_type(*s);
      const auto* type = sketches_.registry().find(echo.type_name);
      no_go = type && type->no_go;
      sketches_.remove(*u.sketch_id);
      echo.vertices.clear();
    } else {
      throw CommandError("unknown sketch op " + u.op);
    }
    if (u.op != "delete") {
      const geom::Sketch& s = *sketches_.find(*echo.sketch_id);
      echo.type_name = geom::sketch_type(s);
      echo.vertices = vertices_of(s);
      echo.closed = closed_of(s);
      const auto* type = sketches_.registry().find(echo.type_name);
      no_go = no_go || (type && type->no_go);
    }
  } catch (const std::exception& e) {
    spdlog::debug("sketch update rejected: {}", e.what());
    echo.op = "rejected";
    no_go = false;
  }
  wire::Bytes frame = msg::encode(echo);
  record_frame(kServerNode, frame);
  send(kServerNode, TransportClass::reliable, frame);
  if (no_go) rebuild_grid();
}

void Mission::phase_tactics() {
  const double t = now();
  for (const auto& u : pending_sketches_) handle_sketch_update(u);
  pending_sketches_.clear();

  tactics::TacticWorld w = world();
  for (const auto& r : pending_requests_) {
    wire::Bytes frame = msg::encode(engine_.handle(r, w, t));
    record_frame(kServerNode, frame);
    send(kServerNode, TransportClass::reliable, frame);
  }
  pending_requests_.clear();

  tactics::TacticsEngine::Output out = engine_.tick(w, t);
  if (!out.jobs.empty()) auctioneer_.submit(std::move(out.jobs));
  if (!out.cancel_jobs.empty()) auctioneer_.cancel(out.cancel_jobs, t);
  for (const auto& s : out.statuses) {
    wire::Bytes frame = msg::encode(s);
    record_frame(kServerNode, frame);
    send(kServerNode, TransportClass::reliable, frame);
  }
}

void Mission::check_assignments() {
  ++stats_.ticks_checked;
  std::set<msg::JobId> jobs;
  for (const auto& [agent, job] : auctioneer_.assigned()) {
    if (!jobs.insert(job).second) ++stats_.double_assignments;
    const auto* rec = auctioneer_.find(job);
    if (!rec || rec->agent != agent) ++stats_.double_assignments;
  }
  std::set<msg::JobId> running;
  for (const auto& a : agents_) {
    auto job = a.current_job();
    if (job && !running.insert(*job).second) ++stats_.duplicate_executions;
  }
}

bool Mission::settled() const {
  for (const auto& [id, inst] : engine_.instances()) {
    if (!tactics::terminal(inst.state)) return false;
  }
  for (const auto& [id, rec] : auctioneer_.jobs()) {
    if (rec.state != alloc::Auctioneer::JobRecord::State::done) return false;
  }
  return true;
}

}  // namespace swarm::server
