#include "swarm/alloc/auction.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

namespace swarm::alloc {

bool eligible(const msg::Job& job, AgentId agent, msg::PlatformKind platform, msg::PayloadKind payload) {
  if (platform == msg::PlatformKind::c2) return false;
  auto accepts = [](const auto& list, auto v) { return list.empty() || std::find(list.begin(), list.end(), v) != list.end(); };
  return accepts(job.platforms, platform) && accepts(job.payloads, payload) && accepts(job.selection, agent);
}

std::optional<geom::Vec3> job_goal(const msg::Job& job) {
  if (job.waypoints.empty()) return std::nullopt;
  return job.waypoints.front();
}

std::optional<double> compute_bid(const BidInputs& in, const msg::Job& job) {
  if (in.status != msg::AgentStatus::idle) return std::nullopt;
  if (!eligible(job, in.agent, in.platform, in.payload)) return std::nullopt;
  if (in.battery < kBatteryReserve || in.health.critical) return std::nullopt;
  const auto goal = job_goal(job);
  const double d = goal ? geom::ground_distance(in.position, *goal) : 0.0;
  return d + kBatteryWeight * (1.0 - in.battery) + kDegradedWeight * in.health.degraded;
}

Matching greedy_match(std::span<const JobId> jobs, std::span<const BidEntry> bids, const std::set<AgentId>& busy) {
  const std::set<JobId> wanted(jobs.begin(), jobs.end());
  std::vector<BidEntry> order;
  for (const auto& b : bids)
    if (wanted.contains(b.job) && !busy.contains(b.agent)) order.push_back(b);
  std::sort(order.begin(), order.end(), [](const BidEntry& a, const BidEntry& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.agent != b.agent) return a.agent < b.agent;
    return a.job < b.job;
  });
  Matching m;
  std::set<JobId> done;
  std::set<AgentId> used;
  for (const auto& b : order) {
    if (done.contains(b.job) || used.contains(b.agent)) continue;
    m.assignments.emplace_back(b.job, b.agent);
    done.insert(b.job);
    used.insert(b.agent);
  }
  for (JobId j : wanted)
    if (!done.contains(j)) m.unassignable.push_back(j);
  return m;
}

const char* to_string(JobEventKind k) {
  switch (k) {
    case JobEventKind::assigned: return "assigned";
    case JobEventKind::unassignable: return "unassignable";
    case JobEventKind::succeeded: return "succeeded";
    case JobEventKind::failed: return "failed";
    case JobEventKind::cancelled: return "cancelled";
  }
  return "?";
}

// ---------------------------------------------------------------------------

void Auctioneer::submit(std::vector<msg::Job> jobs) {
  for (auto& j : jobs) {
    const JobId id = j.job_id;
    if (jobs_.contains(id)) throw std::invalid_argument("duplicate job id " + std::to_string(id));
    JobRecord rec;
    rec.job = std::move(j);
    jobs_.emplace(id, std::move(rec));
    queued_.push_back(id);
  }
}

void Auctioneer::on_bid(const msg::Bid& bid, double) {
  auto jit = jobs_.find(bid.job_id);
  if (jit == jobs_.end() || jit->second.state != JobRecord::State::bidding) return;
  auto ait = auctions_.find(jit->second.auction);
  if (ait == auctions_.end()) return;
  ait->second.responses[{bid.job_id, bid.agent_id}] = bid.value;
}

void Auctioneer::fail(JobId id, double now, bool retry) {
  auto& rec = jobs_.at(id);
  if (rec.agent) assigned_.erase(*rec.agent);
  const AgentId agent = rec.agent.value_or(0);
  rec.agent.reset();
  ++rec.failures;
  if (retry && rec.failures <= cfg_.max_retries) {
    rec.state = JobRecord::State::bidding;
    queued_.push_back(id);
    return;
  }
  rec.state = JobRecord::State::done;
  pending_events_.push_back({JobEventKind::failed, id, rec.job.tactic_id, agent, now});
}

void Auctioneer::on_task_result(const msg::TaskResult& r, double now) {
  auto it = jobs_.find(r.job_id);
  if (it == jobs_.end() || it->second.state != JobRecord::State::assigned || it->second.agent != r.agent_id) {
    ++warnings_;
    spdlog::warn("task result for unknown or unassigned job {} from agent {}", r.job_id, r.agent_id);
    return;
  }
  auto& rec = it->second;
  switch (r.outcome) {
    case msg::TaskOutcome::succeeded:
      assigned_.erase(r.agent_id);
      rec.state = JobRecord::State::done;
      pending_events_.push_back({JobEventKind::succeeded, r.job_id, rec.job.tactic_id, r.agent_id, now});
      break;
    case msg::TaskOutcome::failed:
      fail(r.job_id, now, true);
      break;
    case msg::TaskOutcome::cancelled:
      assigned_.erase(r.agent_id);
      rec.state = JobRecord::State::done;
      pending_events_.push_back({JobEventKind::cancelled, r.job_id, rec.job.tactic_id, r.agent_id, now});
      break;
  }
}

void Auctioneer::on_agent_lost(AgentId agent, double now) {
  auto it = assigned_.find(agent);
  if (it == assigned_.end()) return;
  const JobId job = it->second;
  fail(job, now, true);
  // It may still be working out of radio contact; tell it to stop.
  pending_cancels_.push_back(job);
}

void Auctioneer::fail_without_retry(AgentId agent, double now) {
  auto it = assigned_.find(agent);
  if (it != assigned_.end()) fail(it->second, now, false);
}

void Auctioneer::cancel(std::span<const JobId> ids, double now) {
  for (JobId id : ids) {
    auto it = jobs_.find(id);
    if (it == jobs_.end() || it->second.state == JobRecord::State::done) continue;
    auto& rec = it->second;
    if (rec.agent) {
      assigned_.erase(*rec.agent);
      pending_cancels_.push_back(id);
    }
    if (rec.state == JobRecord::State::bidding) {
      std::erase(queued_, id);
      if (auto a = auctions_.find(rec.auction); a != auctions_.end()) std::erase(a->second.jobs, id);
    }
    pending_events_.push_back({JobEventKind::cancelled, id, rec.job.tactic_id, rec.agent.value_or(0), now});
    rec.agent.reset();
    rec.state = JobRecord::State::done;
  }
}

bool Auctioneer::all_answered(const Auction& a) const {
  for (JobId j : a.jobs)
    for (AgentId ag : a.expected)
      if (!a.responses.contains({j, ag})) return false;
  return true;
}

Auctioneer::Output Auctioneer::tick(double now, const msg::AgentTable& table) {
  Output out;

  if (!queued_.empty()) {
    Auction a;
    a.opened = now;
    a.jobs = queued_;
    queued_.clear();
    for (AgentId id : table.fresh_agents(now)) {
      const auto& hb = table.find(id)->last;
      if (hb.status != msg::AgentStatus::idle || assigned_.contains(id)) continue;
      for (JobId j : a.jobs)
        if (eligible(jobs_.at(j).job, id, hb.platform, hb.payload)) {
          a.expected.insert(id);
          break;
        }
    }
    // Per-pair expectations: an expected agent must answer every job it is
    // eligible for; ineligible pairs are answered on its behalf.
    for (JobId j : a.jobs) {
      const auto& job = jobs_.at(j).job;
      for (AgentId id : a.expected) {
        const auto& hb = table.find(id)->last;
        if (!eligible(job, id, hb.platform, hb.payload)) a.responses[{j, id}] = std::nullopt;
      }
    }
    const std::uint64_t aid = next_auction_++;
    for (JobId j : a.jobs) {
      jobs_.at(j).auction = aid;
      out.broadcast.push_back(jobs_.at(j).job);
    }
    auctions_.emplace(aid, std::move(a));
  }

  for (auto it = auctions_.begin(); it != auctions_.end();) {
    Auction& a = it->second;
    const bool expired = now - a.opened >= cfg_.window - 1e-9;
    if (!expired && !(all_answered(a) && now > a.opened)) {
      ++it;
      continue;
    }
    std::vector<BidEntry> bids;
    for (const auto& [key, v] : a.responses)
      if (v) bids.push_back({key.first, key.second, *v});
    std::set<AgentId> busy;
    for (const auto& [agent, job] : assigned_) busy.insert(agent);
    const auto m = greedy_match(a.jobs, bids, busy);
    for (const auto& [job, agent] : m.assignments) {
      auto& rec = jobs_.at(job);
      rec.state = JobRecord::State::assigned;
      rec.agent = agent;
      assigned_[agent] = job;
      out.command.assignments.emplace_back(job, agent);
      out.events.push_back({JobEventKind::assigned, job, rec.job.tactic_id, agent, now});
    }
    for (JobId job : m.unassignable) {
      auto& rec = jobs_.at(job);
      rec.state = JobRecord::State::done;
      out.events.push_back({JobEventKind::unassignable, job, rec.job.tactic_id, 0, now});
    }
    it = auctions_.erase(it);
  }

  out.command.cancellations = std::move(pending_cancels_);
  pending_cancels_.clear();
  out.events.insert(out.events.begin(), pending_events_.begin(), pending_events_.end());
  pending_events_.clear();
  return out;
}

const Auctioneer::JobRecord* Auctioneer::find(JobId id) const {
  auto it = jobs_.find(id);
  return it == jobs_.end() ? nullptr : &it->second;
}

}  // namespace swarm::alloc
