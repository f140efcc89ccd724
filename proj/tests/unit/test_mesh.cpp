#include <algorithm>
#include <numeric>
#include <random>
#include <map>
#include <set>

#include "doctest.h"
#include "swarm/net/mesh.hpp"

using namespace swarm::net;
using swarm::geom::Vec3;

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Brute-force disk adjacency, independent of MeshNetwork::connectivity.
bool linked(const RadioNode& a, const RadioNode& b) {
  if (!a.alive || !b.alive) return false;
  const double dx = a.position.x - b.position.x, dy = a.position.y - b.position.y, dz = a.position.z - b.position.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz) <= std::min(a.range_m, b.range_m);
}

std::vector<RadioNode> random_nodes(std::mt19937_64& rng, int n, double extent, double range) {
  std::uniform_real_distribution<double> u(0.0, extent);
  std::vector<RadioNode> out;
  for (int i = 0; i < n; ++i) out.push_back(RadioNode{static_cast<NodeId>(i + 1), {u(rng), u(rng), 0.0}, range, true});
  return out;
}

std::vector<std::set<NodeId>> oracle_components(const std::vector<RadioNode>& nodes) {
  UnionFind uf(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      if (linked(nodes[i], nodes[j])) uf.unite(i, j);
  std::map<std::size_t, std::set<NodeId>> groups;
  for (std::size_t i = 0; i < nodes.size(); ++i) groups[uf.find(i)].insert(nodes[i].id);
  std::vector<std::set<NodeId>> out;
  for (auto& [root, g] : groups) out.push_back(g);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("disk connectivity") {
  MeshNetwork m;
  m.add_node({1, {0, 0, 0}, 50});
  m.add_node({2, {10, 0, 0}, 50});
  m.add_node({3, {70, 0, 0}, 50});
  const auto c = m.connectivity();
  CHECK(c.edge_count() == 1);
  CHECK(c.adjacency[0] == std::vector<std::uint32_t>{1});
  CHECK(c.adjacency[2].empty());
  CHECK_THROWS(m.add_node({1, {0, 0, 0}, 50}));
}

TEST_CASE("chain reaches the far end only through the relay") {
  MeshNetwork m;
  m.add_node({1, {0, 0, 0}, 50});
  m.add_node({2, {40, 0, 0}, 50});
  m.add_node({3, {80, 0, 0}, 50});
  for (NodeId n : {1u, 2u, 3u}) m.join(n, 9);
  m.inject_multicast(1, 9, Protocol::udp, {1, 2, 3});
  auto d = m.step(1.0);
  REQUIRE(d.size() == 3);
  CHECK(d[0].node == 1);
  CHECK(d[1].node == 2);
  CHECK(d[2].node == 3);
  CHECK(d[2].time == doctest::Approx(0.020));
  CHECK(m.counters().relays >= 1);

  m.set_alive(2, false);
  m.inject_multicast(1, 9, Protocol::udp, {4});
  d = m.step(1.0);
  REQUIRE(d.size() == 1);
  CHECK(d[0].node == 1);
  CHECK(m.in_flight() == 0);
}

TEST_CASE("lossless flood delivers exactly once to every member") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto nodes = random_nodes(rng, 50, 300.0, 75.0);
    MeshNetwork m(LinkModel{0.0, 0.01, 1});
    for (const auto& n : nodes) {
      m.add_node(n);
      if (n.id % 3 != 0) m.join(n.id, 1);
    }
    const auto before = m.counters();
    m.inject_multicast(1, 1, Protocol::pgm, {42});
    const auto d = m.step(5.0);
    std::multiset<NodeId> got;
    for (const auto& x : d) got.insert(x.node);
    std::set<NodeId> expected;
    for (const auto& comp : oracle_components(nodes)) {
      if (!comp.contains(1)) continue;
      for (auto id : comp)
        if (id % 3 != 0) expected.insert(id);
    }
    CHECK(std::set<NodeId>(got.begin(), got.end()) == expected);
    CHECK(got.size() == expected.size());
    CHECK(m.counters().relays - before.relays <= nodes.size());
    CHECK(m.in_flight() == 0);
  }
}

TEST_CASE("total loss leaves only the local delivery") {
  MeshNetwork m(LinkModel{1.0, 0.01, 5});
  for (NodeId i = 1; i <= 10; ++i) {
    m.add_node({i, {static_cast<double>(i), 0, 0}});
    m.join(i, 1);
  }
  m.inject_multicast(4, 1, Protocol::udp, {1});
  const auto d = m.step(1.0);
  REQUIRE(d.size() == 1);
  CHECK(d[0].node == 4);
  CHECK(m.counters().relays == 0);
  CHECK(m.counters().injections == 1);
}

TEST_CASE("partition report matches a union-find oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    auto nodes = random_nodes(rng, 40, 400.0, 60.0 + static_cast<double>(trial));
    if (trial % 5 == 0) nodes[trial % 40].alive = false;
    MeshNetwork m;
    for (const auto& n : nodes) m.add_node(n);
    std::vector<std::set<NodeId>> got;
    for (const auto& comp : m.partition_report()) {
      CHECK(std::is_sorted(comp.begin(), comp.end()));
      got.emplace_back(comp.begin(), comp.end());
    }
    std::sort(got.begin(), got.end());
    CHECK(got == oracle_components(nodes));
  }
  MeshNetwork one;
  one.add_node({1, {0, 0, 0}});
  one.add_node({2, {1, 0, 0}});
  CHECK(one.partition_report().size() == 1);
  one.add_node({3, {1000, 0, 0}});
  CHECK(one.partition_report().size() == 2);
}

TEST_CASE("no delivery across a partition") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto nodes = random_nodes(rng, 30, 500.0, 70.0);
    MeshNetwork m;
    for (const auto& n : nodes) {
      m.add_node(n);
      m.join(n.id, 2);
    }
    const NodeId origin = static_cast<NodeId>(1 + trial);
    m.inject_multicast(origin, 2, Protocol::udp, {0});
    std::set<NodeId> got;
    for (const auto& x : m.step(10.0)) got.insert(x.node);
    for (const auto& comp : oracle_components(nodes))
      if (comp.contains(origin)) CHECK(got == comp);
  }
}

TEST_CASE("same seed and schedule give identical delivery logs") {
  auto run = [](std::uint64_t seed) {
    std::mt19937_64 rng(99);
    auto nodes = random_nodes(rng, 40, 250.0, 75.0);
    MeshNetwork m(LinkModel{0.3, 0.01, seed});
    for (const auto& n : nodes) {
      m.add_node(n);
      m.join(n.id, 1);
    }
    std::vector<std::tuple<double, NodeId, NodeId, std::uint8_t>> log;
    for (int k = 0; k < 50; ++k) {
      m.inject_multicast(static_cast<NodeId>(1 + k % 40), 1, Protocol::udp, {static_cast<std::uint8_t>(k)});
      for (const auto& d : m.step_until(0.1 * (k + 1))) log.emplace_back(d.time, d.node, d.origin, (*d.packet)[0]);
    }
    return log;
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
}

TEST_CASE("hop filter drops scripted hops") {
  MeshNetwork m;
  m.add_node({1, {0, 0, 0}, 50});
  m.add_node({2, {40, 0, 0}, 50});
  m.add_node({3, {80, 0, 0}, 50});
  for (NodeId n : {1u, 2u, 3u}) m.join(n, 1);
  m.set_hop_filter([](NodeId from, NodeId to, Protocol, const swarm::wire::Bytes&) { return from == 2 && to == 3; });
  m.inject_multicast(1, 1, Protocol::udp, {1});
  const auto d = m.step(1.0);
  CHECK(d.size() == 2);
  CHECK(m.counters().hop_losses == 1);
}

TEST_CASE("moving a node updates adjacency on the next step") {
  MeshNetwork m;
  m.add_node({1, {0, 0, 0}, 50});
  m.add_node({2, {100, 0, 0}, 50});
  m.join(2, 1);
  m.inject_multicast(1, 1, Protocol::udp, {1});
  CHECK(m.step(1.0).empty());
  m.set_position(2, Vec3{30, 0, 0});
  m.inject_multicast(1, 1, Protocol::udp, {1});
  CHECK(m.step(1.0).size() == 1);
}
