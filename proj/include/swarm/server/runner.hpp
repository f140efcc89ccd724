#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "swarm/server/mission.hpp"

namespace swarm::server {

enum class Pace { max_speed, realtime };

struct RunOptions {
  std::uint64_t ticks = 0;
  Pace pace = Pace::max_speed;
  /// Called after every tick, on the loop thread.
  std::function<void(Mission&)> after_tick;
  /// Called before every tick; the place to drain console queues.
  std::function<void(Mission&)> before_tick;
  const std::atomic<bool>* stop = nullptr;
};

struct RunReport {
  std::uint64_t ticks = 0;
  double wall_s = 0.0;
  std::uint64_t hash = 0;
};

/// Fixed 10 Hz steps. Realtime sleeps until each tick's wall deadline; the
/// simulation itself is the same in both paces.
RunReport run(Mission& mission, const RunOptions& options);

struct ReplayCheck {
  bool ok = false;
  std::uint64_t ticks = 0;
  std::uint64_t expected_hash = 0;
  std::uint64_t actual_hash = 0;
  std::optional<std::size_t> first_divergence;  // record index
  std::string message;
};

/// Re-simulates from the header and recorded inputs and compares every
/// record and the terminal hash.
ReplayCheck verify_replay(const std::vector<ReplayRecord>& records);

/// Synthetic site for throughput runs: the 84/174 air share of the roster,
/// buildings, artifacts and a scan-plus-deploy script that keeps everyone
/// busy.
std::string bench_scenario_text(int agents, std::uint64_t seed = 1);

struct BenchReport {
  int agents = 0;
  std::uint64_t ticks = 0;
  double wall_s = 0.0;
  double hz = 0.0;  // simulated ticks per wall second
  std::size_t assigned_agents = 0;
};
BenchReport bench(int agents, std::uint64_t ticks);

}  // namespace swarm::server
