#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "swarm/alloc/auction.hpp"
#include "swarm/coverage/coverage.hpp"
#include "swarm/geom/sketch.hpp"
#include "swarm/msg/data_store.hpp"
#include "swarm/net/mesh.hpp"
#include "swarm/net/reliable.hpp"
#include "swarm/plan/grid.hpp"
#include "swarm/server/buildings.hpp"
#include "swarm/server/c2.hpp"
#include "swarm/server/replay.hpp"
#include "swarm/server/scenario.hpp"
#include "swarm/sim/agent.hpp"
#include "swarm/tactics/engine.hpp"

namespace swarm::server {

inline constexpr double kTickS = 0.1;
inline constexpr int kTicksPerSecond = 10;
inline constexpr net::NodeId kServerNode = 50000;
inline constexpr net::GroupId kSwarmGroup = 1;

struct MissionStats {
  std::set<AgentId> assigned_agents;  // every agent named in a Cmd assignment
  /// Auctioneer invariant: a job held by two agents, or an agent by two jobs.
  std::uint64_t double_assignments = 0;
  /// Ticks x jobs being flown by two agents at once, which happens when a
  /// lost agent keeps working out of radio contact after its job moved on.
  std::uint64_t duplicate_executions = 0;
  std::uint64_t ticks_checked = 0;
  std::uint64_t commands_sent = 0;
  std::uint64_t detection_reports = 0;  // received by the server
  std::uint64_t rejected_inputs = 0;
  std::vector<std::string> input_errors;
  /// Distinct artifacts known to the server, sampled once per second.
  std::vector<std::size_t> detection_curve;
};

/// The whole simulated mission: agents, mesh, C2 instances and the server
/// with its auctioneer and tactics engine, advanced in fixed 100 ms ticks.
/// Within a tick: inputs, then agents by id (and C2 nodes), then the
/// network, then allocation, then tactics. Not thread-safe; one loop owns it.
class Mission {
 public:
  /// `scenario_text` goes into the replay header; replay rebuilds from it.
  Mission(Scenario scenario, std::string scenario_text, std::uint64_t seed);
  /// Parses the text; the seed defaults to the scenario's.
  static std::unique_ptr<Mission> from_text(const std::string& text, std::optional<std::uint64_t> seed = {});

  Mission(const Mission&) = delete;
  Mission& operator=(const Mission&) = delete;

  /// Queues a console command for the next tick. Throws CommandError for a
  /// malformed command; nothing is queued then.
  void submit(const nlohmann::json& command);
  void tick();
  void run_ticks(std::uint64_t n);
  /// Writes the end record; further ticks are an error.
  void finish();

  double now() const { return static_cast<double>(tick_) * kTickS; }
  std::uint64_t ticks() const { return tick_; }
  std::uint64_t seed() const { return seed_; }
  ReplayLog& log() { return log_; }
  const ReplayLog& log() const { return log_; }
  std::uint64_t hash() const { return log_.hash(); }

  const Scenario& scenario() const { return scenario_; }
  const std::vector<sim::Agent>& agents() const { return agents_; }
  const sim::Agent* agent(AgentId id) const;
  const std::vector<sim::Artifact>& artifacts() const { return artifacts_; }
  const alloc::Auctioneer& auctioneer() const { return auctioneer_; }
  const tactics::TacticsEngine& engine() const { return engine_; }
  const geom::SketchDatabase& sketches() const { return sketches_; }
  const msg::AgentTable& agent_table() const { return table_; }
  const msg::DataStore& intel_store() const { return store_; }
  const BuildingTracker& buildings() const { return buildings_; }
  const coverage::CoverageTable& coverage() const { return coverage_; }
  const plan::OccupancyGrid& grid() const { return grid_; }
  const C2Node& c2(std::size_t i = 0) const { return c2_.at(i); }
  std::size_t c2_count() const { return c2_.size(); }
  const net::MeshNetwork& mesh() const { return *mesh_; }
  const MissionStats& stats() const { return stats_; }

  /// Test hook: drops every radio hop while set. Not recorded in the log.
  void set_partitioned(bool partitioned);

  /// True once every tactic instance is terminal and no job is live.
  bool settled() const;

  /// Per-tick console snapshot. Coverage is the costly part.
  nlohmann::json snapshot(bool with_coverage = true) const;
  /// Sent on connect: tactic palette and sketch types.
  nlohmann::json hello() const;

 private:
  struct Node {
    net::NodeId id = 0;
    std::unique_ptr<net::MulticastEndpoint> endpoint;
    std::vector<net::ReceivedFrame> inbox;
  };

  void spawn(const RosterEntry& entry, std::uint64_t tick_of_spawn);
  Node& add_node(net::NodeId id, Vec3 position, net::StartPolicy policy);
  Node& node(net::NodeId id) { return *nodes_.at(node_index_.at(id)); }
  void send(net::NodeId from, net::TransportClass t, const wire::Bytes& frame);
  void record_frame(net::NodeId from, const wire::Bytes& frame);
  void record_event(const nlohmann::json& e);

  void apply_inputs();
  void apply(const nlohmann::json& cmd);
  void apply_estop();
  void apply_fidelity(const nlohmann::json& cmd);
  void phase_agents();
  void phase_network();
  void phase_allocation();
  void phase_tactics();
  void check_assignments();
  void greet_c2(AgentId c2);
  void handle_sketch_update(const msg::SketchUpdate& u);
  void rebuild_grid();
  tactics::TacticWorld world();
  std::optional<Vec2> landing_site(Vec2 from);

  Scenario scenario_;
  std::string scenario_text_;
  std::uint64_t seed_;
  std::uint64_t tick_ = 0;

  std::unique_ptr<net::MeshNetwork> mesh_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::map<net::NodeId, std::size_t> node_index_;
  msg::MessageDecoder decoder_;

  std::vector<sim::Agent> agents_;
  std::map<AgentId, std::uint64_t> next_heartbeat_;
  std::vector<msg::AgentStatus> last_status_;
  std::vector<sim::Artifact> artifacts_;
  std::vector<sim::FieldNode> field_nodes_;
  std::vector<C2Node> c2_;

  // Server state.
  msg::AgentTable table_;
  msg::AgentTable c2_table_;
  msg::DataStore store_;
  alloc::Auctioneer auctioneer_;
  tactics::TacticsEngine engine_;
  geom::SketchDatabase sketches_;
  BuildingTracker buildings_;
  coverage::CoverageTable coverage_;
  plan::OccupancyGrid grid_;
  std::vector<Vec2> landing_claims_;
  std::vector<msg::TacticRequest> pending_requests_;
  std::vector<msg::SketchUpdate> pending_sketches_;
  std::vector<alloc::JobEvent> pending_events_;

  std::deque<nlohmann::json> inputs_;
  std::size_t script_next_ = 0;
  ReplayLog log_;
  MissionStats stats_;
};

}  // namespace swarm::server
