#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "swarm/alloc/auction.hpp"
#include "swarm/geom/scene.hpp"
#include "swarm/msg/messages.hpp"
#include "swarm/plan/grid.hpp"

namespace swarm::sim {

using geom::Vec2;
using geom::Vec3;
using msg::AgentId;
using msg::JobId;
using msg::PayloadKind;
using msg::PlatformKind;

inline constexpr double kQuadSpeed = 5.0;
inline constexpr double kUgvSpeed = 1.5;
inline constexpr double kVtolSpeed = 16.0;
inline constexpr double kVtolMinSpeed = 12.0;
inline constexpr double kVtolLoiterRadius = 30.0;
inline constexpr double kMaxAccel = 2.0;
inline constexpr double kQuadCeiling = 120.0;

inline constexpr double kQuadEndurance = 15.0 * 60.0;
inline constexpr double kUgvEndurance = 3.5 * 3600.0;
inline constexpr double kVtolEndurance = 45.0 * 60.0;
inline constexpr double kIdleDrainFactor = 1.0 / 20.0;
inline constexpr double kSafeLandBattery = 0.20;

inline constexpr double kOuterRange = 20.0;
inline constexpr double kInnerRange = 8.0;
inline constexpr double kIedRadius = 5.0;
/// A killed agent keeps heartbeating (as killed) this long.
inline constexpr double kDeathRattleS = 2.0;

double cruise_speed(PlatformKind k);
double endurance(PlatformKind k);

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PrimitiveKind { move_to, waypoints, hold, orbit, land };
const char* to_string(PrimitiveKind k);

/// What the agent is executing. Jobs become move_to/waypoints/hold/land;
/// orbit is a VTOL loitering with nothing to do.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::move_to;
  std::optional<JobId> job;
  std::vector<Vec3> waypoints;
  std::size_t next = 0;
  double hold_s = 0.0;
  double held = 0.0;
  std::optional<Vec3> face;
  bool land = false;
  bool safe_land = false;  // battery-triggered
  // Loiter circle, used by VTOLs whenever they wait in the air.
  Vec2 orbit_centre{};
  double orbit_angle = 0.0;
};

struct AgentState {
  AgentId id = 0;
  PlatformKind platform = PlatformKind::quad;
  Vec3 position{};
  Vec3 velocity{};
  double heading = 0.0;
  double battery = 1.0;
  msg::AgentStatus status = msg::AgentStatus::idle;
  PayloadKind payload = PayloadKind::none;
  std::uint8_t fidelity = 1;
  std::uint32_t config_hash = 0;
  std::optional<Primitive> primitive;
};

struct Artifact {
  std::uint32_t id = 0;
  std::uint32_t outer_id = 0;
  std::uint32_t inner_id = 0;
  msg::ArtifactRole role = msg::ArtifactRole::benign;
  Vec3 position{};
  bool dynamic = false;
  bool neutralized = false;
  Vec3 anchor{};  // dynamic artifacts wander around this point
};

/// Slow circular wander for dynamic artifacts; static ones never move.
void advance_artifacts(std::span<Artifact> artifacts, double now);

enum class NodeEffect { none, disable_agent };

struct FieldNode {
  std::uint32_t id = 0;
  Vec3 position{};
  double radius = kIedRadius;
  NodeEffect effect = NodeEffect::disable_agent;
  std::optional<PayloadKind> countered_by = PayloadKind::ew;
  bool neutralized = false;
};

/// Terrain the motion models need.
struct StepEnv {
  std::array<const plan::OccupancyGrid*, 3> grids{};  // indexed by plan::Layer
  /// Where an air agent at `p` should put down. Null or nullopt lands in place.
  std::function<std::optional<Vec2>(Vec2)> landing_site;
};

class Agent {
 public:
  explicit Agent(AgentState s);

  const AgentState& state() const { return s_; }
  AgentId id() const { return s_.id; }
  bool alive() const { return s_.status != msg::AgentStatus::killed; }
  bool airborne() const;
  /// VTOL flying a vertical-only segment this tick (take-off or landing).
  bool hover_transition() const { return hover_; }
  std::optional<JobId> current_job() const;

  /// Bid for a broadcast job; the job is remembered for a later assignment.
  msg::Bid bid(const msg::Job& job);
  /// Starts jobs assigned to this agent, drops cancelled ones.
  void on_command(const msg::Cmd& cmd);
  /// Starts a job directly. Returns false when the agent cannot take it.
  bool start_job(const msg::Job& job);

  void step(double dt, double now, const StepEnv& env);

  /// Outer/inner fiducial detections not yet reported.
  std::vector<msg::Detection> sense(std::span<const Artifact> artifacts, std::span<const geom::Building> buildings,
                                    double now);

  /// Takes effect at the next step; the active primitive carries over.
  /// Throws SimError for levels other than 1 and 2.
  void set_fidelity(int level, std::uint32_t config_hash);

  void kill(double now);
  /// Airborne agents drop to the ground where they are, every air agent
  /// disarms. Returns true when this agent changed. The current job is
  /// abandoned without a result.
  bool emergency_stop();

  /// nullopt once a killed agent has gone quiet.
  std::optional<msg::Heartbeat> heartbeat(double now) const;
  std::vector<msg::TaskResult> take_results();

 private:
  void begin(Primitive p);
  void finish_job(msg::TaskOutcome outcome);
  void trigger_safe_land(const StepEnv& env);
  void enter_loiter();
  void advance(double dt, const StepEnv& env);
  void move_toward(Vec3 target, double dt, bool stop_at_target, bool& reached);
  void move_vtol(Vec3 target, double dt, bool& reached);
  void loiter(double dt);
  Vec3 clamp_altitude(Vec3 p) const;
  void plan_leg(const StepEnv& env);

  AgentState s_;
  std::optional<int> pending_fidelity_;
  std::uint32_t pending_hash_ = 0;
  std::vector<Vec3> leg_;  // fidelity 2 planner path to the current waypoint
  bool leg_valid_ = false;
  std::map<JobId, msg::Job> offered_;
  std::set<std::pair<std::uint32_t, int>> reported_;
  std::vector<msg::TaskResult> results_;
  std::optional<double> killed_at_;
  bool low_battery_ = false;
  bool hover_ = false;
};

/// Kills agents inside an armed node's radius unless they carry the
/// countering payload. Returns the ids killed by this call.
std::vector<AgentId> field_node_effects(std::span<Agent> agents, std::span<const FieldNode> nodes, double now);

}  // namespace swarm::sim
