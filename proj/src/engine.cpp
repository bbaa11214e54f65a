#include "asyncdual/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>

#include "asyncdual/errors.hpp"

namespace asyncdual {

namespace {

// Bookkeeping shared by the dry pass and the numeric run: which origin each
// mailbox slot holds, when every agent completed, and the staleness stamps.
class StampTracker {
 public:
  StampTracker(const Graph& graph, bool record)
      : graph_(graph), record_(record), live_(graph.size()), snapshot_(graph.size()), completed_(graph.size()),
        meter_(graph.size()) {
    for (int i = 0; i < graph.size(); ++i) live_[i].assign(graph.neighbors(i).size(), 0);
    trace_.num_agents = graph.size();
    trace_.update_counts.assign(graph.size(), 0);
    trace_.records_complete = record;
  }

  void start(AgentId i) { snapshot_[i] = live_[i]; }

  void complete(AgentId i, Counter k, Tick tick) {
    meter_.activation(i, k);
    ++trace_.update_counts[i];
    const auto& nb = graph_.neighbors(i);
    for (std::size_t s = 0; s < nb.size(); ++s) {
      const Counter tau = stamp(nb[s], snapshot_[i][s], k);
      meter_.staleness(k, tau);
      if (record_) trace_.records.push_back(StalenessRecord{k, tick, i, nb[s], tau});
    }
  }

  void close_counter(const std::vector<AgentId>& completions, Counter k, Tick tick) {
    for (AgentId i : completions) {
      completed_[i].push_back(k);
      const int self = graph_.slot(i, i);
      if (self >= 0) live_[i][self] = k + 1;
    }
    trace_.counter_ticks.push_back(tick);
  }

  // True when the message is newer than what the slot holds.
  bool deliver(const Delivery& d) {
    const int s = graph_.slot(d.to, d.from);
    if (s < 0) throw ScheduleError("delivery on a non-edge (" + std::to_string(d.from) + "," + std::to_string(d.to) + ")");
    if (d.origin <= live_[d.to][s]) return false;
    live_[d.to][s] = d.origin;
    return true;
  }

  Trace finish(Counter horizon) {
    trace_.horizon = horizon;
    trace_.realized_q = horizon > 0 ? meter_.finish(horizon) : 1;
    trace_.max_staleness = meter_.max_staleness();
    return std::move(trace_);
  }

 private:
  // Data of j with values current from counter `origin` were produced at the
  // first completion of j at or after origin; nothing newer than k can be in use.
  Counter stamp(AgentId j, Counter origin, Counter k) const {
    const auto& c = completed_[j];
    auto it = std::lower_bound(c.begin(), c.end(), origin);
    if (it == c.end()) return k;
    return std::min(k, *it);
  }

  const Graph& graph_;
  bool record_;
  std::vector<std::vector<Counter>> live_;
  std::vector<std::vector<Counter>> snapshot_;
  std::vector<std::vector<Counter>> completed_;
  QMeter meter_;
  Trace trace_;
};

void check_same_graph(const Problem& problem, const Timeline& timeline) {
  if (timeline.num_agents() != problem.num_agents()) {
    throw DimensionError("timeline has " + std::to_string(timeline.num_agents()) + " agents, problem has " +
                         std::to_string(problem.num_agents()));
  }
  for (int i = 0; i < problem.num_agents(); ++i) {
    if (timeline.config().graph.neighbors(i) != problem.neighbors(i)) {
      throw DimensionError("timeline and problem disagree on the neighbors of agent " + std::to_string(i));
    }
  }
}

struct Metrics {
  const Problem& problem;
  const std::optional<Vector>& reference;

  RunRow row(Counter k, double avg, const std::vector<AgentState>& states, double residual) const {
    PrimalPoint x;
    DualPoint y;
    for (const auto& s : states) {
      x.blocks.push_back(s.x);
      y.blocks.push_back(s.y);
    }
    return row(k, avg, x, y, residual);
  }

  RunRow row(Counter k, double avg, const PrimalPoint& x, const DualPoint& y, double residual) const {
    RunRow r;
    r.k = k;
    r.avg_updates = avg;
    r.dist = reference ? (x.stacked() - *reference).norm() : std::numeric_limits<double>::quiet_NaN();
    r.dual = dual_value_and_gradient(problem, y).value;
    r.feas = feasibility_violation(problem, x);
    r.residual = residual;
    return r;
  }
};

bool wants_row(Counter k, Counter every, Counter horizon) { return k == horizon || (every > 0 && k % every == 0); }

IterateSnapshot snapshot_of(Counter k, const std::vector<AgentState>& states) {
  PrimalPoint x;
  DualPoint y;
  for (const auto& s : states) {
    x.blocks.push_back(s.x);
    y.blocks.push_back(s.y);
  }
  return IterateSnapshot{k, x.stacked(), y.stacked()};
}

}  // namespace

PrimalPoint SimulationResult::final_x() const {
  PrimalPoint x;
  for (const auto& s : final_states) x.blocks.push_back(s.x);
  return x;
}

DualPoint SimulationResult::final_y() const {
  DualPoint y;
  for (const auto& s : final_states) y.blocks.push_back(s.y);
  return y;
}

Trace dry_run(Timeline& timeline, Counter horizon, bool record_events) {
  if (horizon < 0) throw ScheduleError("negative horizon");
  timeline.reset();
  StampTracker tracker(timeline.config().graph, record_events);
  Counter done = 0;
  while (done < horizon) {
    auto batch = timeline.next();
    if (!batch) throw ScheduleError("timeline ended after " + std::to_string(done) + " counters");
    for (AgentId i : batch->starts) tracker.start(i);
    if (batch->counter) {
      const Counter k = *batch->counter;
      for (AgentId i : batch->completions) tracker.complete(i, k, batch->tick);
      tracker.close_counter(batch->completions, k, batch->tick);
      done = k + 1;
    }
    for (const auto& d : batch->deliveries) tracker.deliver(d);
  }
  return tracker.finish(horizon);
}

SimulationResult run_async(const Problem& problem, const ConstantsTable& constants, Timeline& timeline,
                           const RunOptions& options) {
  check_same_graph(problem, timeline);
  if (static_cast<int>(constants.gamma.size()) != problem.num_agents()) throw Error("step sizes are not set");
  if (options.horizon < 0) throw ScheduleError("negative horizon");
  if (options.reference_x && options.reference_x->size() != problem.total_primal_dim()) {
    throw DimensionError("reference point has the wrong dimension");
  }
  timeline.reset();

  const int n = problem.num_agents();
  const Graph& graph = problem.graph();
  std::vector<AgentState> states = initial_states(problem);
  std::vector<std::vector<MailboxEntry>> snapshot(n);
  std::vector<bool> has_snapshot(n, false);
  std::map<std::tuple<AgentId, AgentId, Counter>, MailboxEntry> in_flight;
  StampTracker tracker(graph, options.record_trace);
  const Metrics metrics{problem, options.reference_x};

  SimulationResult result;
  RunRecord& rec = result.record;
  rec.mode = "async";
  rec.q = constants.q.value_or(1);
  rec.seed = timeline.config().seed;
  rec.gamma_scale = constants.scale;
  rec.admissible = constants.admissible;
  {
    const RunRow r0 = metrics.row(0, 0.0, states, 0.0);
    rec.initial_dist = r0.dist;
    rec.initial_dual = r0.dual;
  }
  if (options.history_every > 0) result.history.push_back(snapshot_of(0, states));

  std::int64_t cumulative = 0;
  Counter done = 0;
  std::vector<AgentUpdate> updates;
  while (done < options.horizon) {
    auto batch = timeline.next();
    if (!batch) throw ScheduleError("timeline ended after " + std::to_string(done) + " counters");

    for (AgentId i : batch->starts) {
      tracker.start(i);
      // A zero-length update reads the live mailbox at completion, which is
      // the same data, so only longer updates need a copy.
      if (timeline.config().clocks[i].compute_time > 0) {
        snapshot[i] = states[i].mailbox;
        has_snapshot[i] = true;
      }
    }

    if (batch->counter) {
      const Counter k = *batch->counter;
      double s_sq = 0.0;
      updates.clear();
      // Every completion reads the pre-k state; nothing is applied until all are computed.
      for (AgentId i : batch->completions) {
        tracker.complete(i, k, batch->tick);
        AgentState view;
        view.x = states[i].x;
        view.y = states[i].y;
        if (has_snapshot[i]) {
          view.mailbox = std::move(snapshot[i]);
          has_snapshot[i] = false;
        } else {
          view.mailbox = states[i].mailbox;
        }
        const Vector s = update_residual(problem, constants, i, view, true);
        s_sq += s.squaredNorm();
        if (options.observer) {
          const Vector grad = stale_gradient(problem, i, view);
          options.observer(UpdateObservation{k, i, constants.gamma[i], view.y, grad, s});
        }
        updates.push_back(async_agent_update(problem, constants, i, std::move(view)));
      }

      for (std::size_t u = 0; u < updates.size(); ++u) {
        const AgentId i = batch->completions[u];
        states[i].x = std::move(updates[u].state.x);
        states[i].y = std::move(updates[u].state.y);
        const int self = graph.slot(i, i);
        if (self >= 0) states[i].mailbox[self] = make_entry(problem, i, i, states[i].x, states[i].y, k + 1);
      }
      for (const auto& send : batch->sends) {
        const auto pos = std::find(batch->completions.begin(), batch->completions.end(), send.from);
        if (pos == batch->completions.end()) throw ScheduleError("send from an agent that did not complete");
        auto& outbox = updates[pos - batch->completions.begin()].outbox;
        auto msg = std::find_if(outbox.begin(), outbox.end(), [&](const OutgoingMessage& m) { return m.to == send.to; });
        if (msg == outbox.end()) throw ScheduleError("send on a non-edge");
        in_flight.emplace(std::make_tuple(send.from, send.to, send.origin),
                          MailboxEntry{msg->dual, msg->coupling, send.origin});
      }
      tracker.close_counter(batch->completions, k, batch->tick);
      cumulative += static_cast<std::int64_t>(batch->completions.size());
      done = k + 1;

      if (wants_row(done, options.record_every, options.horizon)) {
        rec.rows.push_back(metrics.row(done, static_cast<double>(cumulative) / n, states, std::sqrt(s_sq)));
      }
      if (options.history_every > 0 && (done % options.history_every == 0 || done == options.horizon)) {
        result.history.push_back(snapshot_of(done, states));
      }
    }

    for (const auto& d : batch->deliveries) {
      auto it = in_flight.find(std::make_tuple(d.from, d.to, d.origin));
      if (it == in_flight.end()) throw ScheduleError("delivery without a matching send");
      if (tracker.deliver(d)) states[d.to].mailbox[graph.slot(d.to, d.from)] = std::move(it->second);
      in_flight.erase(it);
    }
  }

  result.trace = tracker.finish(options.horizon);
  result.final_states = std::move(states);
  return result;
}

SimulationResult run_sync(const Problem& problem, double gamma, const RunOptions& options) {
  if (!(gamma > 0.0)) throw Error("synchronous step must be positive");
  if (options.horizon < 0) throw ScheduleError("negative horizon");
  const int n = problem.num_agents();
  const Metrics metrics{problem, options.reference_x};

  DualPoint y;
  for (int i = 0; i < n; ++i) y.blocks.push_back(Vector::Zero(problem.dual_dim(i)));
  PrimalPoint x = primal_response(problem, y);

  SimulationResult result;
  RunRecord& rec = result.record;
  rec.mode = "sync";
  rec.q = 1;
  rec.seed = 0;
  rec.gamma_scale = 1.0;
  rec.admissible = true;
  {
    const RunRow r0 = metrics.row(0, 0.0, x, y, 0.0);
    rec.initial_dist = r0.dist;
    rec.initial_dual = r0.dual;
  }
  Trace& trace = result.trace;
  trace.num_agents = n;
  trace.update_counts.assign(n, 0);
  trace.records_complete = options.record_trace;

  auto snap = [&](Counter k) { result.history.push_back(IterateSnapshot{k, x.stacked(), y.stacked()}); };
  if (options.history_every > 0) snap(0);

  for (Counter k = 0; k < options.horizon; ++k) {
    auto [nx, ny] = sync_iteration(problem, gamma, x, y);
    const double residual = (ny.stacked() - y.stacked()).norm() / gamma;
    x = std::move(nx);
    y = std::move(ny);
    trace.counter_ticks.push_back(k);
    for (int i = 0; i < n; ++i) {
      ++trace.update_counts[i];
      if (options.record_trace) {
        for (AgentId j : problem.neighbors(i)) trace.records.push_back(StalenessRecord{k, k, i, j, k});
      }
    }
    const Counter done = k + 1;
    if (wants_row(done, options.record_every, options.horizon)) {
      rec.rows.push_back(metrics.row(done, static_cast<double>(done), x, y, residual));
    }
    if (options.history_every > 0 && (done % options.history_every == 0 || done == options.horizon)) snap(done);
  }
  trace.horizon = options.horizon;
  trace.realized_q = 1;
  trace.max_staleness = 0;

  result.final_states.resize(n);
  for (int i = 0; i < n; ++i) {
    result.final_states[i].x = x[i];
    result.final_states[i].y = y[i];
  }
  return result;
}

}  // namespace asyncdual
