#include "swarm/net/mesh.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace swarm::net {

std::size_t Connectivity::edge_count() const {
  std::size_t total = 0;
  for (const auto& adj : adjacency) total += adj.size();
  return total / 2;
}

MeshNetwork::MeshNetwork(LinkModel link) : link_(link), rng_(link.seed) {}

void MeshNetwork::add_node(const RadioNode& node) {
  if (index_.contains(node.id)) throw std::invalid_argument("duplicate radio node " + std::to_string(node.id));
  index_.emplace(node.id, static_cast<std::uint32_t>(nodes_.size()));
  nodes_.push_back(node);
  groups_.emplace_back();
  for (auto& [id, flood] : floods_) flood.seen.push_back(0);
  adjacency_dirty_ = true;
}

bool MeshNetwork::has_node(NodeId id) const { return index_.contains(id); }

std::uint32_t MeshNetwork::index_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::out_of_range("unknown radio node " + std::to_string(id));
  return it->second;
}

const RadioNode& MeshNetwork::node(NodeId id) const { return nodes_[index_of(id)]; }

void MeshNetwork::set_position(NodeId id, geom::Vec3 position) {
  auto& n = nodes_[index_of(id)];
  if (n.position == position) return;
  n.position = position;
  adjacency_dirty_ = true;
}

void MeshNetwork::set_alive(NodeId id, bool alive) {
  auto& n = nodes_[index_of(id)];
  if (n.alive == alive) return;
  n.alive = alive;
  adjacency_dirty_ = true;
}

void MeshNetwork::join(NodeId id, GroupId group) {
  auto& g = groups_[index_of(id)];
  if (std::find(g.begin(), g.end(), group) == g.end()) g.push_back(group);
}

bool MeshNetwork::is_member(std::uint32_t index, GroupId group) const {
  const auto& g = groups_[index];
  return std::find(g.begin(), g.end(), group) != g.end();
}

Connectivity MeshNetwork::connectivity() const {
  Connectivity c;
  const std::size_t n = nodes_.size();
  c.ids.reserve(n);
  for (const auto& node : nodes_) c.ids.push_back(node.id);
  c.adjacency.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = nodes_[i];
    if (!a.alive) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& b = nodes_[j];
      if (!b.alive) continue;
      const double r = std::min(a.range_m, b.range_m);
      const geom::Vec3 d = a.position - b.position;
      if (d.x * d.x + d.y * d.y + d.z * d.z <= r * r) {
        c.adjacency[i].push_back(static_cast<std::uint32_t>(j));
        c.adjacency[j].push_back(static_cast<std::uint32_t>(i));
      }
    }
  }
  return c;
}

std::vector<std::vector<NodeId>> MeshNetwork::partition_report() const {
  const auto c = connectivity();
  const std::size_t n = nodes_.size();
  std::vector<int> comp(n, -1);
  std::vector<std::vector<NodeId>> out;
  // Visit in id order so component order is deterministic.
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return nodes_[a].id < nodes_[b].id; });
  for (auto start : order) {
    if (comp[start] >= 0) continue;
    const int cid = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<std::uint32_t> stack{start};
    comp[start] = cid;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      out.back().push_back(nodes_[u].id);
      for (auto v : c.adjacency[u]) {
        if (comp[v] < 0) {
          comp[v] = cid;
          stack.push_back(v);
        }
      }
    }
    std::sort(out.back().begin(), out.back().end());
  }
  return out;
}

void MeshNetwork::refresh_adjacency() {
  if (!adjacency_dirty_) return;
  adjacency_ = connectivity().adjacency;
  adjacency_dirty_ = false;
}

bool MeshNetwork::lost() {
  if (link_.loss_prob <= 0.0) return false;
  if (link_.loss_prob >= 1.0) return true;
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  return u < link_.loss_prob;
}

void MeshNetwork::inject_multicast(NodeId origin, GroupId group, Protocol protocol, wire::Bytes packet) {
  const auto oi = index_of(origin);
  if (!nodes_[oi].alive) return;
  const std::uint64_t fid = next_flood_++;
  Flood flood{origin, oi, group, protocol, std::make_shared<const wire::Bytes>(std::move(packet)),
              std::vector<std::uint8_t>(nodes_.size(), 0), 0};
  flood.seen[oi] = 1;
  ++counters_.injections;
  if (is_member(oi, group)) pending_local_.push_back(MeshDelivery{now_, origin, origin, group, protocol, flood.packet});
  flood.pending = 1;
  queue_.push(Transmission{now_ + link_.hop_latency_s, next_order_++, fid, oi});
  floods_.emplace(fid, std::move(flood));
}

void MeshNetwork::transmit(const Transmission& tx, std::vector<MeshDelivery>& out) {
  auto it = floods_.find(tx.flood);
  if (it == floods_.end()) return;
  Flood& flood = it->second;
  const auto& sender = nodes_[tx.sender_index];
  if (sender.alive) {
    if (tx.sender_index != flood.origin_index) ++counters_.relays;
    for (auto v : adjacency_[tx.sender_index]) {
      if (flood.seen[v] != 0) continue;
      if (!nodes_[v].alive) continue;
      if (lost()) {
        ++counters_.hop_losses;
        continue;
      }
      if (filter_ && filter_(sender.id, nodes_[v].id, flood.protocol, *flood.packet)) {
        ++counters_.hop_losses;
        continue;
      }
      flood.seen[v] = 1;
      if (is_member(v, flood.group)) {
        out.push_back(MeshDelivery{tx.time, nodes_[v].id, flood.origin, flood.group, flood.protocol, flood.packet});
        ++counters_.deliveries;
      }
      ++flood.pending;
      queue_.push(Transmission{tx.time + link_.hop_latency_s, next_order_++, tx.flood, v});
    }
  }
  if (--flood.pending == 0) floods_.erase(it);
}

std::vector<MeshDelivery> MeshNetwork::step(double dt) { return step_until(now_ + dt); }

std::vector<MeshDelivery> MeshNetwork::step_until(double end) {
  std::vector<MeshDelivery> out;
  out.swap(pending_local_);
  counters_.deliveries += out.size();
  refresh_adjacency();
  while (!queue_.empty() && queue_.top().time < end) {
    const Transmission tx = queue_.top();
    queue_.pop();
    transmit(tx, out);
  }
  now_ = end;
  return out;
}

}  // namespace swarm::net
