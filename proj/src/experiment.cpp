#include "asyncdual/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "asyncdual/errors.hpp"
#include "asyncdual/format.hpp"

namespace asyncdual {

ScheduleConfig preset_for_q(const Graph& graph, int q_target, std::uint64_t seed, Counter horizon) {
  if (q_target < 1) throw ScheduleError("Q target must be >= 1");
  if (q_target == 1) {
    ScheduleConfig c = ScheduleConfig::synchronous(graph, horizon);
    c.seed = seed;
    return c;
  }
  std::mt19937_64 rng(seed);
  ScheduleConfig c;
  c.graph = graph;
  c.seed = seed;
  c.horizon = horizon;
  for (int i = 0; i < graph.size(); ++i) {
    AgentClock clock;
    clock.period = (rng() & 1) ? 2 : 1;
    clock.phase = static_cast<Tick>(rng() % static_cast<std::uint64_t>(clock.period));
    clock.compute_time = clock.period > 1 ? static_cast<Tick>(rng() & 1) : 0;
    c.clocks.push_back(clock);
  }
  // Agent 0 runs every tick so that every tick is a counter and delays in
  // ticks translate into staleness in counters.
  c.clocks[0] = AgentClock{1, 0, 0};
  const bool drops = q_target >= 8;
  c.default_link.drop_probability = drops ? 0.05 : 0.0;
  c.default_link.max_consecutive_drops = drops ? 1 : 0;
  // Nearly fixed delays keep the freshest message close to the oldest one, so
  // the realized Q sits just under the target. Shrink until the dry pass agrees.
  Tick delay = std::max<Tick>(0, q_target - 2);
  while (true) {
    c.default_link.max_delay = delay;
    c.default_link.min_delay = std::max<Tick>(0, delay - 2);
    Timeline t(c);
    const int realized = dry_run(t, horizon, false).realized_q;
    if (realized <= q_target) break;
    if (delay == 0) {
      // Periods alone overshoot a tiny target.
      ScheduleConfig s = ScheduleConfig::synchronous(graph, horizon);
      s.seed = seed;
      return s;
    }
    delay = std::max<Tick>(0, delay - (realized - q_target));
  }
  return c;
}

std::string ScenarioResult::label() const {
  std::string s = mode;
  if (mode == "async") s += "_Q" + std::to_string(q_target);
  s += "_scale" + fmt_double(scale) + "_seed" + std::to_string(seed);
  return s;
}

double ScenarioResult::final_dist() const {
  return record.rows.empty() ? record.initial_dist : record.rows.back().dist;
}

double ScenarioResult::final_dist_ratio() const {
  return record.initial_dist > 0.0 ? final_dist() / record.initial_dist : final_dist();
}

ScenarioResult run_async_scenario(const Problem& problem, const ScheduleConfig& schedule, const Vector& x_star,
                                  double safety, double scale, const ExperimentConfig& config, int q_target) {
  Timeline timeline = build_schedule(schedule);
  const Trace dry = dry_run(timeline, config.horizon, false);
  if (config.horizon > 0) {
    for (auto c : dry.update_counts) {
      if (c == 0) throw ScheduleError("schedule never activates some agent");
    }
  }
  const int q = dry.realized_q;
  const auto pairs = compute_theta_pairs(problem);
  const ConstantsTable constants =
      choose_gammas(compute_agent_constants(problem, pairs, config.phi_denominator), q, safety, scale);

  RunOptions opts;
  opts.horizon = config.horizon;
  opts.reference_x = x_star;
  opts.record_trace = config.record_trace;
  opts.record_every = config.record_every;
  SimulationResult run = run_async(problem, constants, timeline, opts);
  if (run.trace.realized_q != q) throw ScheduleError("numeric run saw a different schedule than the dry pass");

  ScenarioResult out;
  out.mode = "async";
  out.q_target = q_target;
  out.realized_q = q;
  out.scale = scale;
  out.seed = schedule.seed;
  out.admissible = constants.admissible;
  out.record = std::move(run.record);
  out.trace = std::move(run.trace);
  out.gamma = constants.gamma;
  return out;
}

ScenarioResult run_sync_scenario(const Problem& problem, const Vector& x_star, double safety, double scale,
                                 const ExperimentConfig& config) {
  const double gamma = scale * sync_step_size(problem, compute_theta_pairs(problem), safety);
  RunOptions opts;
  opts.horizon = config.horizon;
  opts.reference_x = x_star;
  opts.record_trace = config.record_trace;
  opts.record_every = config.record_every;
  SimulationResult run = run_sync(problem, gamma, opts);
  run.record.gamma_scale = scale;
  run.record.admissible = scale * safety < 1.0;

  ScenarioResult out;
  out.mode = "sync";
  out.scale = scale;
  out.admissible = run.record.admissible;
  out.record = std::move(run.record);
  out.trace = std::move(run.trace);
  out.gamma.assign(problem.num_agents(), gamma);
  return out;
}

ExperimentResult run_experiment(const Problem& problem, const ExperimentConfig& config) {
  ExperimentResult result;
  result.reference = solve_reference(problem, config.reference);
  const Vector& x_star = result.reference.x_star;
  if (config.sync) {
    for (double scale : config.scales) result.runs.push_back(run_sync_scenario(problem, x_star, config.safety, scale, config));
    return result;
  }
  if (config.schedule) {
    ScheduleConfig s = *config.schedule;
    s.horizon = config.horizon;
    for (double scale : config.scales) {
      result.runs.push_back(run_async_scenario(problem, s, x_star, config.safety, scale, config, 0));
    }
    return result;
  }
  for (int q : config.q_targets) {
    for (double scale : config.scales) {
      for (auto seed : config.seeds) {
        const ScheduleConfig s = preset_for_q(problem.graph(), q, seed, config.horizon);
        result.runs.push_back(run_async_scenario(problem, s, x_star, config.safety, scale, config, q));
      }
    }
  }
  return result;
}

void write_summary(std::ostream& out, const ExperimentResult& result) {
  out << "reference: " << to_string(result.reference.method) << " f*=" << fmt_double(result.reference.f_star)
      << '\n';
  for (const auto& r : result.runs) {
    out << r.label() << "  realized_Q=" << r.realized_q << "  admissible=" << (r.admissible ? "yes" : "no")
        << "  counters=" << (r.record.rows.empty() ? 0 : r.record.rows.back().k)
        << "  final_dist=" << fmt_double(r.final_dist()) << "  ratio=" << fmt_double(r.final_dist_ratio()) << '\n';
  }
}

}  // namespace asyncdual
