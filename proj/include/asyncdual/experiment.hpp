#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "asyncdual/constants.hpp"
#include "asyncdual/engine.hpp"
#include "asyncdual/oracle.hpp"
#include "asyncdual/schedule.hpp"

namespace asyncdual {

/// Schedule aimed at a realized Q close to (and not above) q_target. Q = 1 is
/// the synchronous timeline. Otherwise agents run with period 1 or 2 (agent 0
/// always 1, so every tick is a counter), some with a one-tick compute time,
/// links draw delays from a narrow range just under the target, with rare
/// single drops from Q = 8 on. The delay range is shrunk until a dry pass over
/// the horizon measures at most q_target.
ScheduleConfig preset_for_q(const Graph& graph, int q_target, std::uint64_t seed, Counter horizon);

struct ExperimentConfig {
  bool sync = false;
  std::vector<int> q_targets{1};
  std::vector<double> scales{1.0};
  std::vector<std::uint64_t> seeds{0};
  double safety = kDefaultSafety;
  Counter horizon = 200000;
  Counter record_every = 1;
  bool record_trace = false;
  PhiDenominator phi_denominator = PhiDenominator::Owner;
  /// Replaces the preset when set (q_targets is then ignored).
  std::optional<ScheduleConfig> schedule;
  ReferenceOptions reference;
};

struct ScenarioResult {
  std::string mode;
  int q_target = 1;
  int realized_q = 1;
  double scale = 1.0;
  std::uint64_t seed = 0;
  bool admissible = true;
  RunRecord record;
  Trace trace;
  std::vector<double> gamma;

  /// e.g. async_Q25_scale1_seed0
  std::string label() const;
  double final_dist() const;
  double final_dist_ratio() const;
};

struct ExperimentResult {
  ReferenceSolution reference;
  std::vector<ScenarioResult> runs;
};

/// Async: one run per (Q target, scale, seed); sync: one run per scale with
/// gamma = scale * safety / L where L bounds the Lipschitz constant of grad q.
ExperimentResult run_experiment(const Problem& problem, const ExperimentConfig& config);

/// One async scenario against a known reference.
ScenarioResult run_async_scenario(const Problem& problem, const ScheduleConfig& schedule, const Vector& x_star,
                                  double safety, double scale, const ExperimentConfig& config, int q_target);

ScenarioResult run_sync_scenario(const Problem& problem, const Vector& x_star, double safety, double scale,
                                 const ExperimentConfig& config);

/// One line per scenario: label, realized Q, admissibility, final distance ratio.
void write_summary(std::ostream& out, const ExperimentResult& result);

}  // namespace asyncdual
