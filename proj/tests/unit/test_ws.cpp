#include <chrono>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "doctest.h"
#include "json.hpp"
#include "swarm/server/mission.hpp"
#include "swarm/server/runner.hpp"
#include "swarm/server/ws_server.hpp"

using namespace swarm::server;
using nlohmann::json;
namespace asio = boost::asio;
namespace beast = boost::beast;
using tcp = asio::ip::tcp;

namespace {

struct Client {
  asio::io_context io;
  beast::websocket::stream<tcp::socket> ws{io};

  explicit Client(std::uint16_t port) {
    tcp::resolver resolver(io);
    asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws.handshake("127.0.0.1", "/");
  }
  json read() {
    beast::flat_buffer buf;
    ws.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }
  void send(const std::string& text) { ws.write(asio::buffer(text)); }
};

template <typename Pred>
bool wait_for(Pred p) {
  for (int i = 0; i < 200; ++i) {
    if (p()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return p();
}

}  // namespace

TEST_CASE("console websocket: hello, commands, errors and snapshots") {
  auto mission = Mission::from_text(bench_scenario_text(6));
  ConsoleServer server(0);
  server.start(mission->hello());
  REQUIRE(server.port() != 0);

  Client client(server.port());
  json hello = client.read();
  CHECK(hello["type"] == "hello");
  CHECK(hello["tactics"].size() >= 10);
  REQUIRE(wait_for([&] { return server.clients() == 1; }));

  // One connection is ordered: once the last command is accepted the two bad
  // ones have been drained too.
  client.send(R"({"type":"teleport"})");
  client.send("not json");
  client.send(R"({"type":"invoke","tactic":"hold_position","position":[60,245],"params":{"agent_count":1}})");
  std::size_t accepted = 0;
  REQUIRE(wait_for([&] {
    accepted += server.drain(*mission);
    return accepted >= 1;
  }));
  CHECK(accepted == 1);
  for (int i = 0; i < 2; ++i) {
    json err = client.read();
    CHECK(err["type"] == "error");
    CHECK_FALSE(err["message"].get<std::string>().empty());
  }

  // Snapshots show the C2's view, which needs a heartbeat round first.
  mission->run_ticks(15);
  server.publish(mission->snapshot(false));
  json snap = client.read();
  CHECK(snap["type"] == "snapshot");
  CHECK(snap["tick"] == 15);
  CHECK(snap["agents"].size() == 6);

  // The command went into the log as an input, like any other.
  bool logged = false;
  for (const auto& r : mission->log().records()) logged |= r.kind == RecordKind::input;
  CHECK(logged);

  client.ws.close(beast::websocket::close_code::normal);
  CHECK(wait_for([&] { return server.clients() == 0; }));
  server.stop();
}

TEST_CASE("console websocket: stop with a client attached") {
  ConsoleServer server(0);
  server.start({{"type", "hello"}});
  Client client(server.port());
  CHECK(client.read()["type"] == "hello");
  server.stop();
  beast::flat_buffer buf;
  beast::error_code ec;
  client.ws.read(buf, ec);
  CHECK(ec);
}
