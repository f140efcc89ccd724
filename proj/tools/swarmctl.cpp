#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "swarm/server/runner.hpp"
#include "swarm/server/ws_server.hpp"
#include "swarm/tactics/library.hpp"

using namespace swarm;
using namespace swarm::server;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::uint64_t ticks_for(double seconds) { return static_cast<std::uint64_t>(std::llround(seconds * kTicksPerSecond)); }

int cmd_serve(const std::string& scenario, std::optional<std::uint64_t> seed, int port, bool realtime,
              const std::string& record, std::optional<double> duration) {
  std::string text = read_text_file(scenario);
  auto mission = Mission::from_text(text, seed);
  std::ofstream out;
  if (!record.empty()) {
    out.open(record, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(record + ": cannot open for writing");
    mission->log().set_retain(false);
    mission->log().set_sink(&out);
  }
  ConsoleServer console(static_cast<std::uint16_t>(port));
  console.start(mission->hello());
  std::printf("serving '%s' (seed %llu) on ws://127.0.0.1:%u (%s)\n", mission->scenario().name.c_str(),
              static_cast<unsigned long long>(mission->seed()), console.port(), realtime ? "realtime" : "max-speed");
  std::fflush(stdout);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  RunOptions opt;
  opt.ticks = ticks_for(duration.value_or(mission->scenario().duration_s));
  opt.pace = realtime ? Pace::realtime : Pace::max_speed;
  opt.stop = &g_stop;
  opt.before_tick = [&](Mission& m) { console.drain(m); };
  opt.after_tick = [&](Mission& m) { console.publish(m.snapshot(m.ticks() % kTicksPerSecond == 0)); };
  RunReport r = run(*mission, opt);
  mission->finish();
  console.stop();
  std::printf("ticks %llu  wall %.2f s  hash %016llx  assigned %zu\n", static_cast<unsigned long long>(r.ticks),
              r.wall_s, static_cast<unsigned long long>(mission->hash()), mission->stats().assigned_agents.size());
  return 0;
}

int cmd_run(const std::string& scenario, std::optional<std::uint64_t> seed, std::optional<double> duration,
            const std::string& record, bool realtime, bool until_settled) {
  auto mission = Mission::from_text(read_text_file(scenario), seed);
  std::ofstream out;
  if (!record.empty()) {
    out.open(record, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(record + ": cannot open for writing");
    mission->log().set_retain(false);
    mission->log().set_sink(&out);
  }
  RunOptions opt;
  opt.ticks = ticks_for(duration.value_or(mission->scenario().duration_s));
  opt.pace = realtime ? Pace::realtime : Pace::max_speed;
  opt.stop = &g_stop;
  if (until_settled) {
    opt.after_tick = [](Mission& m) {
      if (m.ticks() > 50 && !m.engine().instances().empty() && m.settled()) g_stop = true;
    };
  }
  std::signal(SIGINT, on_signal);
  RunReport r = run(*mission, opt);
  mission->finish();
  const auto& st = mission->stats();
  std::printf("scenario   %s\n", mission->scenario().name.c_str());
  std::printf("ticks      %llu (%.1f s simulated, %.2f s wall)\n", static_cast<unsigned long long>(r.ticks),
              mission->now(), r.wall_s);
  std::printf("agents     %zu, assigned %zu\n", mission->agents().size(), st.assigned_agents.size());
  std::printf("artifacts  %zu known of %zu\n", mission->intel_store().size(), mission->artifacts().size());
  std::printf("tactics    %zu instances\n", mission->engine().instances().size());
  for (const auto& [id, inst] : mission->engine().instances()) {
    std::printf("  #%llu %-14s %s%s%s\n", static_cast<unsigned long long>(id), inst.view.definition->name.c_str(),
                std::string(tactics::to_string(inst.state)).c_str(), inst.error ? ": " : "",
                inst.error ? inst.error->c_str() : "");
  }
  for (const auto& e : st.input_errors) std::printf("input error: %s\n", e.c_str());
  for (const auto& e : mission->c2().errors()) std::printf("c2 error: %s\n", e.c_str());
  std::printf("hash       %016llx\n", static_cast<unsigned long long>(mission->hash()));
  return 0;
}

int cmd_replay(const std::string& path) {
  ReplayCheck c = verify_replay(read_replay(path));
  std::printf("%s: %s after %llu ticks (expected %016llx, got %016llx)\n", path.c_str(), c.message.c_str(),
              static_cast<unsigned long long>(c.ticks), static_cast<unsigned long long>(c.expected_hash),
              static_cast<unsigned long long>(c.actual_hash));
  if (c.first_divergence) std::printf("first divergent record: %zu\n", *c.first_divergence);
  return c.ok ? 0 : 1;
}

int cmd_bench(int agents, std::uint64_t ticks) {
  BenchReport b = bench(agents, ticks);
  std::printf("agents %d  ticks %llu  wall %.2f s  %.1f Hz  assigned %zu\n", b.agents,
              static_cast<unsigned long long>(b.ticks), b.wall_s, b.hz, b.assigned_agents);
  return b.hz >= kTicksPerSecond ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Swarm mission server and tools"};
  app.require_subcommand(1);
  std::string level = "warn";
  app.add_option("--log-level", level, "trace, debug, info, warn, error");

  std::string scenario;
  std::optional<std::uint64_t> seed;
  int port = 8765;
  bool realtime = false;
  bool max_speed = false;
  std::string record;
  std::optional<double> duration;

  auto* serve = app.add_subcommand("serve", "Run a scenario with the console WebSocket API");
  serve->add_option("--scenario", scenario, "Scenario GeoJSON file")->required()->check(CLI::ExistingFile);
  serve->add_option("--seed", seed, "Seed (defaults to the scenario's)");
  serve->add_option("--port", port, "WebSocket port (0 picks one)")->check(CLI::Range(0, 65535));
  auto* rt = serve->add_flag("--realtime", realtime, "Pace ticks to the wall clock (default)");
  serve->add_flag("--max-speed", max_speed, "Run as fast as possible")->excludes(rt);
  serve->add_option("--record", record, "Write the replay log here");
  serve->add_option("--duration", duration, "Simulated seconds (defaults to the scenario's)");

  auto* runc = app.add_subcommand("run", "Run a scenario headless and print a summary");
  bool settle = false;
  runc->add_option("--scenario", scenario, "Scenario GeoJSON file")->required()->check(CLI::ExistingFile);
  runc->add_option("--seed", seed, "Seed (defaults to the scenario's)");
  runc->add_option("--duration", duration, "Simulated seconds (defaults to the scenario's)");
  runc->add_option("--record", record, "Write the replay log here");
  runc->add_flag("--realtime", realtime, "Pace ticks to the wall clock");
  runc->add_flag("--until-settled", settle, "Stop once every tactic has finished");

  std::string log_path;
  auto* replay = app.add_subcommand("replay", "Re-simulate a recorded log and verify its hash");
  replay->add_option("--log", log_path, "Replay log")->required()->check(CLI::ExistingFile);

  int agents = 174;
  std::uint64_t ticks = 600;
  auto* benchc = app.add_subcommand("bench", "Measure tick rate on the synthetic site");
  benchc->add_option("--agents", agents, "Agent count")->check(CLI::Range(0, 40000));
  benchc->add_option("--ticks", ticks, "Ticks to run");

  auto* gen = app.add_subcommand("scenario", "Print the synthetic site scenario");
  std::uint64_t gen_seed = 1;
  gen->add_option("--agents", agents, "Agent count")->check(CLI::Range(0, 40000));
  gen->add_option("--seed", gen_seed, "Seed");

  app.add_subcommand("docs", "Print the tactic documentation table");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(level));

  try {
    if (*serve) return cmd_serve(scenario, seed, port, !max_speed, record, duration);
    if (*runc) return cmd_run(scenario, seed, duration, record, realtime, settle);
    if (*replay) return cmd_replay(log_path);
    if (*benchc) return cmd_bench(agents, ticks);
    if (*gen) {
      std::cout << bench_scenario_text(agents, gen_seed) << "\n";
      return 0;
    }
    auto defs = tactics::builtin_tactics().definitions();
    std::cout << tactics::documentation_table(defs);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
