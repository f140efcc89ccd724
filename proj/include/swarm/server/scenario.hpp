#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "swarm/geom/scene.hpp"
#include "swarm/msg/types.hpp"
#include "swarm/plan/grid.hpp"
#include "swarm/sim/agent.hpp"

namespace swarm::server {

using geom::Vec2;
using geom::Vec3;
using msg::AgentId;

/// Schema violation; the message starts with the offending path, e.g.
/// "features[3] (building 'B1'): polygon needs at least 3 vertices".
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RosterEntry {
  msg::PlatformKind platform = msg::PlatformKind::quad;
  msg::PayloadKind payload = msg::PayloadKind::none;
  int count = 0;
  Vec2 spawn{};
  double spacing = 3.0;
  int fidelity = 1;
};

struct NetworkParams {
  double radio_range_m = 75.0;
  double loss_prob = 0.0;
  double hop_latency_s = 0.010;
  std::optional<std::uint64_t> seed;  // defaults to the scenario seed
};

struct C2Spec {
  AgentId id = 0;
  Vec3 position{};
};

/// A sketch parameter present at mission start. `ref` lets scripts name it.
struct SketchSpec {
  std::string type_name;
  std::vector<Vec3> vertices;
  std::string ref;
};

/// Console command replayed at a mission time.
struct ScriptStep {
  double at = 0.0;
  nlohmann::json command;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  double duration_s = 600.0;
  plan::RasterSpec bounds{{0.0, 0.0}, 5.0, 64, 64};
  NetworkParams network;
  Vec3 base{};
  std::vector<C2Spec> c2;
  std::vector<RosterEntry> roster;
  std::vector<geom::Building> buildings;
  std::vector<sim::Artifact> artifacts;
  std::vector<sim::FieldNode> field_nodes;
  std::vector<SketchSpec> sketches;
  std::vector<ScriptStep> script;

  std::size_t agent_count() const;
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario parse_scenario_text(const std::string& text);
/// Throws ScenarioError when the file cannot be read or parsed.
Scenario load_scenario(const std::string& path);
std::string read_text_file(const std::string& path);

/// Obstacle layers for the no-go sketch types: curbs stop ground vehicles,
/// powerlines low flyers, walls both, no-go zones everything.
plan::LayerMask no_go_layers(const std::string& type_name);

}  // namespace swarm::server
