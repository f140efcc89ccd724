#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "swarm/msg/agent_table.hpp"
#include "swarm/msg/messages.hpp"

namespace swarm::alloc {

using msg::AgentId;
using msg::JobId;

inline constexpr double kBatteryReserve = 0.10;
inline constexpr double kBatteryWeight = 200.0;
inline constexpr double kDegradedWeight = 500.0;
inline constexpr double kBidWindowS = 2.0;
inline constexpr int kMaxRetries = 2;

struct Health {
  int degraded = 0;  // count of degraded subsystems
  bool critical = false;
};

/// What an agent knows about itself when a job arrives.
struct BidInputs {
  AgentId agent = 0;
  geom::Vec3 position{};
  double battery = 1.0;
  Health health;
  msg::PlatformKind platform = msg::PlatformKind::quad;
  msg::PayloadKind payload = msg::PayloadKind::none;
  msg::AgentStatus status = msg::AgentStatus::idle;
};

/// Job filter on platform, payload and explicit selection.
bool eligible(const msg::Job& job, AgentId agent, msg::PlatformKind platform, msg::PayloadKind payload);

/// Where the job happens: its first waypoint, if any.
std::optional<geom::Vec3> job_goal(const msg::Job& job);

/// Ground distance to the goal + 200*(1 - battery) + 500*degraded; lower
/// wins. Nullopt (decline) when busy, dead, ineligible, below the reserve or
/// critically unhealthy.
std::optional<double> compute_bid(const BidInputs& in, const msg::Job& job);

struct BidEntry {
  JobId job = 0;
  AgentId agent = 0;
  double value = 0.0;
};

struct Matching {
  std::vector<std::pair<JobId, AgentId>> assignments;  // in selection order
  std::vector<JobId> unassignable;                     // ascending
};

/// Repeatedly takes the lowest remaining (job, agent) bid; ties go to the
/// lower agent id, then the lower job id. Agents in `busy` are skipped.
Matching greedy_match(std::span<const JobId> jobs, std::span<const BidEntry> bids, const std::set<AgentId>& busy = {});

enum class JobEventKind { assigned, unassignable, succeeded, failed, cancelled };
const char* to_string(JobEventKind k);

struct JobEvent {
  JobEventKind kind = JobEventKind::assigned;
  JobId job = 0;
  msg::InstanceId tactic = 0;
  AgentId agent = 0;
  double time = 0.0;
};

/// Centralised auctioneer living in the mission server.
class Auctioneer {
 public:
  struct Config {
    double window = kBidWindowS;
    int max_retries = kMaxRetries;
  };

  struct JobRecord {
    msg::Job job;
    enum class State { bidding, assigned, done } state = State::bidding;
    std::optional<AgentId> agent;
    int failures = 0;
    std::uint64_t auction = 0;
  };

  /// Work produced by a tick: jobs to (re)broadcast, a command to send and
  /// callbacks for the owning tactics.
  struct Output {
    std::vector<msg::Job> broadcast;
    msg::Cmd command;
    std::vector<JobEvent> events;
    bool empty() const {
      return broadcast.empty() && command.assignments.empty() && command.cancellations.empty() && events.empty();
    }
  };

  Auctioneer() = default;
  explicit Auctioneer(Config c) : cfg_(c) {}

  /// Queues jobs for broadcast at the next tick. Job ids must be unique.
  void submit(std::vector<msg::Job> jobs);
  void on_bid(const msg::Bid& bid, double now);
  /// Unknown or unassigned job ids are ignored with a warning.
  void on_task_result(const msg::TaskResult& r, double now);
  /// Treats the agent's live job, if any, as failed (killed, disabled, stale)
  /// and cancels it on the agent in the next Cmd.
  void on_agent_lost(AgentId agent, double now);
  /// Cancels live jobs; assigned ones go out as Cmd cancellations.
  void cancel(std::span<const JobId> jobs, double now);
  /// Failures that must not be re-auctioned (emergency stop).
  void fail_without_retry(AgentId agent, double now);

  /// Opens queued auctions and closes those whose window elapsed or whose
  /// expected bidders all answered. `table` decides who is expected to bid.
  Output tick(double now, const msg::AgentTable& table);

  const JobRecord* find(JobId id) const;
  const std::map<JobId, JobRecord>& jobs() const { return jobs_; }
  /// agent -> live job. Never holds an agent twice.
  const std::map<AgentId, JobId>& assigned() const { return assigned_; }
  std::uint64_t warnings() const { return warnings_; }
  std::size_t open_auctions() const { return auctions_.size(); }

 private:
  struct Auction {
    std::vector<JobId> jobs;
    double opened = 0.0;
    std::set<AgentId> expected;
    std::map<std::pair<JobId, AgentId>, std::optional<double>> responses;
  };

  void fail(JobId id, double now, bool retry);
  bool all_answered(const Auction& a) const;

  Config cfg_{};
  std::map<JobId, JobRecord> jobs_;
  std::map<AgentId, JobId> assigned_;
  std::map<std::uint64_t, Auction> auctions_;
  std::vector<JobId> queued_;
  std::vector<JobEvent> pending_events_;
  std::vector<JobId> pending_cancels_;
  std::uint64_t next_auction_ = 1;
  std::uint64_t warnings_ = 0;
};

}  // namespace swarm::alloc
