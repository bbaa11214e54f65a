#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <utility>
#include <vector>

#include "asyncdual/graph.hpp"
#include "asyncdual/types.hpp"

namespace asyncdual {

/// Local clock of one agent: it starts an update at phase + t * period and
/// completes it compute_time ticks later. compute_time < period, so updates of
/// the same agent never overlap.
struct AgentClock {
  Tick period = 1;
  Tick phase = 0;
  Tick compute_time = 0;
};

/// Directed link j -> i.
struct LinkProfile {
  Tick min_delay = 0;
  Tick max_delay = 0;
  double drop_probability = 0.0;
  int max_consecutive_drops = 0;
};

struct ScheduleConfig {
  Graph graph;
  std::vector<AgentClock> clocks;
  /// Keyed by (from, to). Links not listed use default_link.
  std::map<std::pair<AgentId, AgentId>, LinkProfile> links;
  LinkProfile default_link;
  std::uint64_t seed = 0;
  /// Number of global counters the timeline produces.
  Counter horizon = 0;

  const LinkProfile& link(AgentId from, AgentId to) const;
  /// Throws ScheduleError on violated invariants.
  void validate() const;

  /// Every agent updates every tick, no delays: the synchronous case.
  static ScheduleConfig synchronous(Graph graph, Counter horizon);
};

/// A message leaving `from` at a completion; it reaches `to` at the end of delivery_tick.
struct Send {
  AgentId from = 0;
  AgentId to = 0;
  Tick delivery_tick = 0;
  Counter origin = 0;
};

struct Delivery {
  AgentId from = 0;
  AgentId to = 0;
  /// Counter from which the payload values are current (sender's completion counter + 1).
  Counter origin = 0;
};

/// Everything that happens at one tick, in processing order: mailbox
/// snapshots of starting agents, completions (sharing one counter), then
/// deliveries. A message sent with zero delay is visible from the next tick.
struct TickBatch {
  Tick tick = 0;
  std::vector<AgentId> starts;
  std::vector<AgentId> completions;
  std::optional<Counter> counter;
  std::vector<Send> sends;
  std::vector<Delivery> deliveries;
};

/// Deterministic stream of tick batches realized from a ScheduleConfig. The
/// stream depends on the configuration only, never on iterate values, so a
/// numeric-free pass over it sees exactly the schedule a numeric run will.
class Timeline {
 public:
  explicit Timeline(ScheduleConfig config);

  const ScheduleConfig& config() const { return config_; }
  int num_agents() const { return config_.graph.size(); }

  /// Next batch, or nullopt once `horizon` counters have been emitted.
  std::optional<TickBatch> next();
  void reset();
  Counter counters_emitted() const { return next_counter_; }

 private:
  struct Pending {
    Tick tick;
    std::uint64_t seq;
    Delivery delivery;
    bool operator>(const Pending& o) const { return tick != o.tick ? tick > o.tick : seq > o.seq; }
  };

  Tick sample_delay(const LinkProfile& link);
  bool sample_drop(const LinkProfile& link, int& consecutive);

  ScheduleConfig config_;
  std::mt19937_64 rng_;
  std::vector<Tick> next_start_;
  std::vector<std::optional<Tick>> pending_completion_;
  std::map<std::pair<AgentId, AgentId>, int> consecutive_drops_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> in_flight_;
  std::uint64_t seq_ = 0;
  Counter next_counter_ = 0;
};

Timeline build_schedule(ScheduleConfig config);

/// Line-oriented dump of the first `horizon` counters of a timeline; used to
/// compare timelines byte for byte.
void write_timeline(std::ostream& out, Timeline& timeline);

}  // namespace asyncdual
