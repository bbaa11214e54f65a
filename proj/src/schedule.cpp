#include "asyncdual/schedule.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>

#include "asyncdual/errors.hpp"

namespace asyncdual {

namespace {

void check_link(const LinkProfile& l, const std::string& where) {
  if (l.min_delay < 0 || l.min_delay > l.max_delay) throw ScheduleError(where + ": need 0 <= min_delay <= max_delay");
  if (!(l.drop_probability >= 0.0 && l.drop_probability < 1.0)) {
    throw ScheduleError(where + ": drop probability must lie in [0, 1)");
  }
  if (l.max_consecutive_drops < 0) throw ScheduleError(where + ": max_consecutive_drops must be >= 0");
}

}  // namespace

const LinkProfile& ScheduleConfig::link(AgentId from, AgentId to) const {
  auto it = links.find({from, to});
  return it == links.end() ? default_link : it->second;
}

void ScheduleConfig::validate() const {
  const int n = graph.size();
  if (n == 0) throw ScheduleError("schedule has no agents");
  if (static_cast<int>(clocks.size()) != n) {
    throw ScheduleError("expected " + std::to_string(n) + " agent clocks, got " + std::to_string(clocks.size()));
  }
  for (int i = 0; i < n; ++i) {
    const auto& c = clocks[i];
    const std::string where = "clock of agent " + std::to_string(i);
    if (c.period < 1) throw ScheduleError(where + ": update_period must be >= 1");
    if (c.phase < 0) throw ScheduleError(where + ": phase_offset must be >= 0");
    if (c.compute_time < 0 || c.compute_time >= c.period) {
      throw ScheduleError(where + ": need 0 <= compute_time < update_period");
    }
  }
  check_link(default_link, "default link");
  for (const auto& [key, l] : links) {
    const std::string where = "link " + std::to_string(key.first) + "->" + std::to_string(key.second);
    if (key.first < 0 || key.first >= n || key.second < 0 || key.second >= n || key.first == key.second ||
        !graph.adjacent(key.second, key.first)) {
      throw ScheduleError(where + " is not an edge of the graph");
    }
    check_link(l, where);
  }
  if (horizon < 0) throw ScheduleError("horizon must be >= 0");
}

ScheduleConfig ScheduleConfig::synchronous(Graph graph, Counter horizon) {
  ScheduleConfig c;
  c.clocks.assign(graph.size(), AgentClock{});
  c.graph = std::move(graph);
  c.horizon = horizon;
  return c;
}

Timeline::Timeline(ScheduleConfig config) : config_(std::move(config)) {
  config_.validate();
  reset();
}

void Timeline::reset() {
  rng_.seed(config_.seed);
  const int n = num_agents();
  next_start_.resize(n);
  for (int i = 0; i < n; ++i) next_start_[i] = config_.clocks[i].phase;
  pending_completion_.assign(n, std::nullopt);
  consecutive_drops_.clear();
  in_flight_ = {};
  seq_ = 0;
  next_counter_ = 0;
}

Tick Timeline::sample_delay(const LinkProfile& link) {
  if (link.max_delay == link.min_delay) return link.min_delay;
  const auto span = static_cast<std::uint64_t>(link.max_delay - link.min_delay) + 1;
  return link.min_delay + static_cast<Tick>(rng_() % span);
}

bool Timeline::sample_drop(const LinkProfile& link, int& consecutive) {
  if (link.drop_probability <= 0.0) return false;
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  if (u < link.drop_probability && consecutive < link.max_consecutive_drops) {
    ++consecutive;
    return true;
  }
  consecutive = 0;
  return false;
}

std::optional<TickBatch> Timeline::next() {
  if (next_counter_ >= config_.horizon) return std::nullopt;
  const int n = num_agents();

  Tick t = std::numeric_limits<Tick>::max();
  for (int i = 0; i < n; ++i) {
    t = std::min(t, next_start_[i]);
    if (pending_completion_[i]) t = std::min(t, *pending_completion_[i]);
  }
  if (!in_flight_.empty()) t = std::min(t, in_flight_.top().tick);

  TickBatch b;
  b.tick = t;
  for (int i = 0; i < n; ++i) {
    if (next_start_[i] != t) continue;
    b.starts.push_back(i);
    pending_completion_[i] = t + config_.clocks[i].compute_time;
    next_start_[i] += config_.clocks[i].period;
  }
  for (int i = 0; i < n; ++i) {
    if (pending_completion_[i] && *pending_completion_[i] == t) {
      b.completions.push_back(i);
      pending_completion_[i].reset();
    }
  }
  if (!b.completions.empty()) {
    const Counter k = next_counter_++;
    b.counter = k;
    for (AgentId from : b.completions) {
      for (AgentId to : config_.graph.neighbors(from)) {
        if (to == from) continue;
        const auto& link = config_.link(from, to);
        if (sample_drop(link, consecutive_drops_[{from, to}])) continue;
        const Tick at = t + sample_delay(link);
        in_flight_.push(Pending{at, seq_++, Delivery{from, to, k + 1}});
        b.sends.push_back(Send{from, to, at, k + 1});
      }
    }
  }
  while (!in_flight_.empty() && in_flight_.top().tick == t) {
    b.deliveries.push_back(in_flight_.top().delivery);
    in_flight_.pop();
  }
  return b;
}

Timeline build_schedule(ScheduleConfig config) { return Timeline(std::move(config)); }

void write_timeline(std::ostream& out, Timeline& timeline) {
  timeline.reset();
  while (auto b = timeline.next()) {
    out << "tick " << b->tick;
    if (b->counter) out << " k " << *b->counter;
    out << " starts";
    for (AgentId i : b->starts) out << ' ' << i;
    out << " completions";
    for (AgentId i : b->completions) out << ' ' << i;
    out << " sends";
    for (const auto& s : b->sends) out << ' ' << s.from << '>' << s.to << '@' << s.delivery_tick;
    out << " deliveries";
    for (const auto& d : b->deliveries) out << ' ' << d.from << '>' << d.to << '#' << d.origin;
    out << '\n';
  }
}

}  // namespace asyncdual
