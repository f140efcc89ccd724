#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "json.hpp"

namespace swarm::server {

class Mission;

/// Console WebSocket endpoint. Network I/O runs on its own thread; client
/// commands wait in a queue until the engine loop calls drain(), and
/// snapshots are pushed with publish(). Slow clients skip snapshots rather
/// than buffer them.
class ConsoleServer {
 public:
  /// Port 0 picks a free port.
  explicit ConsoleServer(std::uint16_t port, std::string address = "127.0.0.1");
  ~ConsoleServer();
  ConsoleServer(const ConsoleServer&) = delete;
  ConsoleServer& operator=(const ConsoleServer&) = delete;

  /// `hello` is sent to each client when it connects.
  void start(nlohmann::json hello);
  void stop();
  std::uint16_t port() const;
  std::size_t clients() const;

  /// Engine thread: submits queued commands; rejected ones get an error
  /// reply on the connection that sent them.
  std::size_t drain(Mission& mission);
  void publish(const nlohmann::json& snapshot);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace swarm::server
