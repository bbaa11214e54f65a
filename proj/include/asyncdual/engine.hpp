#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "asyncdual/agents.hpp"
#include "asyncdual/constants.hpp"
#include "asyncdual/run_record.hpp"
#include "asyncdual/schedule.hpp"
#include "asyncdual/trace.hpp"

namespace asyncdual {

/// Seen by RunOptions::observer at every active update.
struct UpdateObservation {
  Counter k = 0;
  AgentId agent = 0;
  double gamma = 0.0;
  const Vector& y;               // y_i(k)
  const Vector& stale_gradient;  // sum_j g_{i,j}(x_j(tau))
  const Vector& residual;        // s_i(k)
};

struct IterateSnapshot {
  Counter k = 0;
  Vector x;
  Vector y;
};

struct RunOptions {
  Counter horizon = 0;
  /// x* for the distance column.
  std::optional<Vector> reference_x;
  bool record_trace = true;
  /// Metrics are computed for every record_every-th counter and for the last one.
  Counter record_every = 1;
  /// 0 keeps no iterate history.
  Counter history_every = 0;
  std::function<void(const UpdateObservation&)> observer;
};

struct SimulationResult {
  Trace trace;
  RunRecord record;
  std::vector<AgentState> final_states;
  std::vector<IterateSnapshot> history;

  PrimalPoint final_x() const;
  DualPoint final_y() const;
};

/// Replays the timeline without numbers and returns the realized trace. Since
/// the timeline does not depend on iterate values this is the exact trace of
/// any numeric run over the same schedule.
Trace dry_run(Timeline& timeline, Counter horizon, bool record_events = true);

/// Algorithm replay over the timeline: active agents update from their
/// mailbox snapshot, completions at one tick share one counter and read the
/// pre-counter state, mailboxes only accept strictly newer data.
SimulationResult run_async(const Problem& problem, const ConstantsTable& constants, Timeline& timeline,
                           const RunOptions& options);

/// Synchronous dual ascent with a common step, every agent updating once per counter.
SimulationResult run_sync(const Problem& problem, double gamma, const RunOptions& options);

}  // namespace asyncdual
