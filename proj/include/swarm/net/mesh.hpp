#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <queue>
#include <random>
#include <unordered_map>
#include <vector>

#include "swarm/geom/geometry.hpp"
#include "swarm/wire/msgpack.hpp"

namespace swarm::net {

using NodeId = std::uint32_t;
using GroupId = std::uint16_t;

/// Transport protocol carried by a mesh datagram, the analogue of the IP
/// protocol number.
enum class Protocol : std::uint8_t { udp, pgm };

struct RadioNode {
  NodeId id = 0;
  geom::Vec3 position{};
  double range_m = 75.0;
  bool alive = true;
};

struct LinkModel {
  double loss_prob = 0.0;
  double hop_latency_s = 0.010;
  std::uint64_t seed = 1;
};

struct MeshDelivery {
  double time = 0.0;
  NodeId node = 0;
  NodeId origin = 0;
  GroupId group = 0;
  Protocol protocol = Protocol::udp;
  std::shared_ptr<const wire::Bytes> packet;
};

/// Neighbour lists indexed like `MeshNetwork::nodes()`.
struct Connectivity {
  std::vector<NodeId> ids;
  std::vector<std::vector<std::uint32_t>> adjacency;
  std::size_t edge_count() const;
};

/// Test hook for scripted impairments. Returning true drops the hop from
/// `from` to `to`; it is consulted after the random loss draw succeeds.
using HopFilter = std::function<bool(NodeId from, NodeId to, Protocol, const wire::Bytes&)>;

struct MeshCounters {
  std::uint64_t injections = 0;  // origin transmissions
  std::uint64_t relays = 0;      // relay transmissions
  std::uint64_t hop_losses = 0;
  std::uint64_t deliveries = 0;
  std::uint64_t transmissions() const { return injections + relays; }
};

/// Range-disk radio mesh with controlled flooding. Each node transmits a
/// given message at most once; receivers that belong to the group deliver on
/// first reception.
class MeshNetwork {
 public:
  explicit MeshNetwork(LinkModel link = {});

  void add_node(const RadioNode& node);
  bool has_node(NodeId id) const;
  void set_position(NodeId id, geom::Vec3 position);
  void set_alive(NodeId id, bool alive);
  void join(NodeId id, GroupId group);
  void set_hop_filter(HopFilter filter) { filter_ = std::move(filter); }

  const std::vector<RadioNode>& nodes() const { return nodes_; }
  const RadioNode& node(NodeId id) const;
  const LinkModel& link() const { return link_; }
  double now() const { return now_; }

  /// Edge (a,b) iff both alive and |a-b| <= min(range_a, range_b).
  Connectivity connectivity() const;

  /// Connected components of the current connectivity graph, each sorted by
  /// node id, ordered by smallest member.
  std::vector<std::vector<NodeId>> partition_report() const;

  /// The origin transmits at the current time. No-op for a dead origin.
  void inject_multicast(NodeId origin, GroupId group, Protocol protocol, wire::Bytes packet);

  /// Advances time by dt and returns deliveries in time order.
  std::vector<MeshDelivery> step(double dt);
  /// Same as step() but to an absolute time, avoiding accumulated rounding.
  std::vector<MeshDelivery> step_until(double t);

  /// Number of floods still propagating.
  std::size_t in_flight() const { return floods_.size(); }
  const MeshCounters& counters() const { return counters_; }

 private:
  struct Flood {
    NodeId origin;
    std::uint32_t origin_index;
    GroupId group;
    Protocol protocol;
    std::shared_ptr<const wire::Bytes> packet;
    std::vector<std::uint8_t> seen;
    std::uint32_t pending = 0;
  };

  struct Transmission {
    double time;
    std::uint64_t order;
    std::uint64_t flood;
    std::uint32_t sender_index;
    bool operator>(const Transmission& o) const { return time != o.time ? time > o.time : order > o.order; }
  };

  std::uint32_t index_of(NodeId id) const;
  bool is_member(std::uint32_t index, GroupId group) const;
  void refresh_adjacency();
  void transmit(const Transmission& tx, std::vector<MeshDelivery>& out);
  bool lost();

  LinkModel link_;
  std::mt19937_64 rng_;
  HopFilter filter_;
  std::vector<RadioNode> nodes_;
  std::vector<std::vector<GroupId>> groups_;
  std::unordered_map<NodeId, std::uint32_t> index_;
  std::vector<std::vector<std::uint32_t>> adjacency_;
  bool adjacency_dirty_ = true;
  std::unordered_map<std::uint64_t, Flood> floods_;
  std::vector<MeshDelivery> pending_local_;
  std::priority_queue<Transmission, std::vector<Transmission>, std::greater<>> queue_;
  std::uint64_t next_flood_ = 0;
  std::uint64_t next_order_ = 0;
  double now_ = 0.0;
  MeshCounters counters_;
};

}  // namespace swarm::net
