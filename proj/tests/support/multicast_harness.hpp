#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "swarm/net/reliable.hpp"

namespace swarm::test {

/// A mesh plus one endpoint per node, driven on a fixed tick. Records every
/// packet emitted by the transport so tests can inspect timings.
struct MulticastHarness {
  struct Emitted {
    double time;
    net::NodeId node;
    net::Protocol protocol;
    net::PgmPacket pgm;  // valid when protocol == pgm
  };

  struct Received {
    double time;
    net::NodeId node;
    net::ReceivedFrame frame;
  };

  net::MeshNetwork mesh;
  net::ReliableParams params;
  std::map<net::NodeId, std::unique_ptr<net::MulticastEndpoint>> endpoints;
  std::vector<Emitted> emitted;
  std::vector<Received> received;
  double dt = 0.1;
  std::int64_t tick_index = 0;

  explicit MulticastHarness(net::LinkModel link = {}, net::ReliableParams p = {}) : mesh(link), params(p) {
    params.tick_interval_s = dt;
  }

  double now() const { return static_cast<double>(tick_index) * dt; }

  net::MulticastEndpoint& add(net::RadioNode node, net::GroupId group = 1,
                              net::StartPolicy policy = net::StartPolicy::from_zero) {
    mesh.add_node(node);
    auto ep = std::make_unique<net::MulticastEndpoint>(node.id, mesh, params, policy);
    ep->join(group);
    ep->set_emit_observer([this](double t, net::NodeId self, net::Protocol proto, const wire::Bytes& bytes) {
      Emitted e{t, self, proto, {}};
      if (proto == net::Protocol::pgm) e.pgm = *net::PgmPacket::parse(bytes);
      emitted.push_back(std::move(e));
    });
    auto& ref = *ep;
    endpoints.emplace(node.id, std::move(ep));
    return ref;
  }

  /// Network deliveries up to now, then transport timers at now.
  void tick() {
    const double t = now();
    for (const auto& d : mesh.step_until(t)) {
      for (auto& f : endpoints.at(d.node)->on_delivery(d)) received.push_back({d.time, d.node, std::move(f)});
    }
    for (auto& [id, ep] : endpoints)
      for (auto& f : ep->tick(t)) received.push_back({t, id, std::move(f)});
  }

  void advance() { ++tick_index; }

  void run_until(double t_end, const std::function<void(double)>& on_tick = {}) {
    while (now() <= t_end + 1e-9) {
      tick();
      if (on_tick) on_tick(now());
      advance();
    }
  }

  std::size_t count(net::PgmType type, net::NodeId node = 0) const {
    std::size_t n = 0;
    for (const auto& e : emitted)
      if (e.protocol == net::Protocol::pgm && e.pgm.type == type && (node == 0 || e.node == node)) ++n;
    return n;
  }
};

}  // namespace swarm::test
