#include "asyncdual/trace.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>

#include "asyncdual/errors.hpp"

namespace asyncdual {

void QMeter::activation(AgentId i, Counter k) {
  // Window starting right after the previous update (or at 0) must reach k.
  max_gap_ = std::max(max_gap_, k - last_[i]);
  last_[i] = k;
}

void QMeter::staleness(Counter k, Counter tau) { max_staleness_ = std::max(max_staleness_, k - tau); }

int QMeter::finish(Counter horizon) const {
  Counter q = std::max<Counter>({1, max_gap_, max_staleness_});
  if (horizon > 0) {
    for (std::size_t i = 0; i < last_.size(); ++i) {
      if (last_[i] < 0) throw ScheduleError("agent " + std::to_string(i) + " never updates: Q is unbounded");
      // Trailing gap: the window {last+1, ..., horizon-1} saw no update.
      q = std::max(q, horizon - last_[i]);
    }
  }
  if (q > std::numeric_limits<int>::max()) throw ScheduleError("realized Q overflows");
  return static_cast<int>(q);
}

int measure_q(const Trace& trace) {
  if (trace.horizon > 0 && !trace.records_complete) {
    throw ScheduleError("trace carries no event records; cannot measure Q");
  }
  // Activation sets rebuilt from the records (one or more records per update).
  std::vector<std::vector<Counter>> active(trace.num_agents);
  Counter staleness = 0;
  for (const auto& r : trace.records) {
    if (r.tau > r.k) throw ScheduleError("record with tau > k at k=" + std::to_string(r.k));
    staleness = std::max(staleness, r.k - r.tau);
    auto& a = active.at(r.agent);
    if (a.empty() || a.back() != r.k) a.push_back(r.k);
  }

  Counter q = std::max<Counter>(1, staleness);
  if (trace.horizon == 0) return static_cast<int>(q);
  for (int i = 0; i < trace.num_agents; ++i) {
    auto& a = active[i];
    if (a.empty()) throw ScheduleError("agent " + std::to_string(i) + " never updates: Q is unbounded");
    std::sort(a.begin(), a.end());
    // Longest run of consecutive counters without agent i; windows of length
    // Q must not fit inside any such run.
    Counter prev = -1;
    for (Counter k : a) {
      q = std::max(q, k - prev);
      prev = k;
    }
    q = std::max(q, trace.horizon - prev);
  }
  return static_cast<int>(q);
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "k,tick,agent,neighbor,tau\n";
  for (const auto& r : trace.records) {
    out << r.k << ',' << r.tick << ',' << r.agent << ',' << r.neighbor << ',' << r.tau << '\n';
  }
}

}  // namespace asyncdual
