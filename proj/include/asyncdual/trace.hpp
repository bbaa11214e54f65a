#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "asyncdual/types.hpp"

namespace asyncdual {

/// Staleness stamp tau_{i,j}^k of the neighbor data agent i used at counter k.
struct StalenessRecord {
  Counter k = 0;
  Tick tick = 0;
  AgentId agent = 0;
  AgentId neighbor = 0;
  Counter tau = 0;
};

/// Online tracker of the realized asynchrony bound. Counts the gap before the
/// first update, gaps between updates, the unfinished gap at the horizon, and
/// the largest staleness k - tau.
class QMeter {
 public:
  explicit QMeter(int num_agents = 0) : last_(num_agents, -1) {}

  void activation(AgentId i, Counter k);
  void staleness(Counter k, Counter tau);
  /// Smallest Q consistent with the observations over [0, horizon).
  /// Throws ScheduleError if some agent never updated.
  int finish(Counter horizon) const;

  Counter max_gap() const { return max_gap_; }
  Counter max_staleness() const { return max_staleness_; }

 private:
  std::vector<Counter> last_;
  Counter max_gap_ = 0;
  Counter max_staleness_ = 0;
};

struct Trace {
  int num_agents = 0;
  /// Counters executed; the trace covers k = 0 .. horizon - 1.
  Counter horizon = 0;
  std::vector<Tick> counter_ticks;
  std::vector<std::int64_t> update_counts;
  /// Per-event records; empty when recording was switched off.
  std::vector<StalenessRecord> records;
  bool records_complete = false;
  /// Computed online while the trace was produced.
  int realized_q = 1;
  Counter max_staleness = 0;
};

/// Smallest Q such that every window {k, ..., k+Q-1} inside the horizon meets
/// every update set T_i and every recorded k - tau <= Q. Recomputed from the
/// event records; throws if the trace has no records or an agent never updates.
int measure_q(const Trace& trace);

/// k,tick,agent,neighbor,tau
void write_trace_csv(std::ostream& out, const Trace& trace);

}  // namespace asyncdual
