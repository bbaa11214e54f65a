// Acceptance checks: one PASS/FAIL line per criterion (criterion 10 only reports).
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "asyncdual/constants.hpp"
#include "asyncdual/engine.hpp"
#include "asyncdual/experiment.hpp"
#include "asyncdual/format.hpp"
#include "asyncdual/generators.hpp"
#include "asyncdual/instance_io.hpp"
#include "asyncdual/oracle.hpp"
#include "asyncdual/trace.hpp"
#include "asyncdual/validation.hpp"

using namespace asyncdual;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and sizes.
constexpr int kOracleInstances = 20;
constexpr double kOracleDx = 1e-6;
constexpr double kDualityGap = 1e-6;
constexpr double kOracleSeconds = 10.0;
constexpr int kSyncSteps = 1000;
constexpr double kSyncTol = 1e-12;
constexpr int kGradientSamples = 100;
constexpr double kGradientRel = 1e-4;
constexpr Counter kHorizon = 200000;
constexpr double kDistRatio = 1e-4;
constexpr double kFinalResidual = 1e-6;
constexpr double kDescentSlack = 1e-8;
constexpr double kInstanceSeconds = 120.0;
constexpr int kRandomInstances = 10;
constexpr int kLipschitzSamples = 1000;
constexpr double kLipschitzSlack = 1e-10;
constexpr double kResidualSlack = 1e-10;
constexpr int kMaxQ = 200;
constexpr Counter kRecordPrefix = 50000;
const std::vector<int> kQTargets{1, 25, 50, 100};
const std::vector<int> kDemoTargets{25, 50, 100};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool ok = true;
  void require(bool cond, const std::string& why) {
    if (!cond) {
      ok = false;
      std::cout << "  fail: " << why << '\n';
    }
  }
};

void report(int id, const std::string& title, const Verdict& v) {
  std::cout << "criterion " << id << ' ' << (v.ok ? "PASS" : "FAIL") << "  " << title << '\n' << std::flush;
}

struct NamedProblem {
  std::string name;
  Problem problem;
};

Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double spread) {
  std::normal_distribution<double> normal(0.0, spread);
  Vector v(n);
  for (Eigen::Index t = 0; t < n; ++t) v[t] = normal(rng);
  return v;
}

DualPoint random_dual(const Problem& p, std::mt19937_64& rng, double spread, double interior = 0.0) {
  DualPoint y;
  for (int i = 0; i < p.num_agents(); ++i) {
    Vector v = project_omega(p, i, random_vector(rng, p.dual_dim(i), spread));
    for (int a = 0; a < p.ineq_rows(i); ++a) v[a] += interior;
    y.blocks.push_back(std::move(v));
  }
  return y;
}

// 1. Long-run oracle against KKT.
Verdict oracle_agreement() {
  Verdict v;
  const auto t0 = Clock::now();
  double worst_dx = 0.0, worst_gap = 0.0;
  for (int s = 0; s < kOracleInstances; ++s) {
    const Problem p = gen_random_instance(1000 + s, equality_family(5)).problem;
    const ReferenceSolution k = kkt_solve(p);
    const ReferenceSolution l = reference_solve(p);
    const double dx = (k.x_star - l.x_star).lpNorm<Eigen::Infinity>();
    const double scale = 1.0 + std::abs(k.f_star);
    const double gap = std::max(std::abs(dual_value_and_gradient(p, l.y_star).value - k.f_star),
                                std::abs(dual_value_and_gradient(p, k.y_star).value - k.f_star)) /
                       scale;
    worst_dx = std::max(worst_dx, dx);
    worst_gap = std::max(worst_gap, gap);
    v.require(dx <= kOracleDx, "instance " + std::to_string(s) + " dx " + fmt_double(dx));
    v.require(gap <= kDualityGap, "instance " + std::to_string(s) + " duality gap " + fmt_double(gap));
  }
  const double secs = seconds_since(t0);
  v.require(secs < kOracleSeconds, "runtime " + fmt_double(secs) + " s");
  std::cout << "  max |dx|_inf " << fmt_double(worst_dx) << ", max relative gap " << fmt_double(worst_gap)
            << ", " << fmt_double(secs) << " s\n";
  return v;
}

// 2. Distributed synchronous round against the centralized projected step.
Verdict sync_equals_centralized() {
  Verdict v;
  double worst = 0.0;
  for (std::uint64_t seed : {7u, 8u}) {
    const Problem p = gen_random_instance(seed, well_conditioned_family(6)).problem;
    const GlobalForm form = assemble_global(p);
    const double gamma = sync_step_size(p, compute_theta_pairs(p));
    std::mt19937_64 rng(seed);
    DualPoint y = random_dual(p, rng, 1.0);
    PrimalPoint x = primal_response(p, y);
    for (int step = 0; step < kSyncSteps; ++step) {
      const Vector want_y = centralized_dual_step(form, y.stacked(), gamma);
      const Vector want_x = centralized_argmin(form, y.stacked());
      auto [nx, ny] = sync_iteration(p, gamma, x, y);
      const Vector sy = ny.stacked();
      const Vector sx = nx.stacked();
      // Blockwise comparison.
      for (int i = 0; i < p.num_agents(); ++i) {
        worst = std::max(worst, (sy.segment(p.dual_offset(i), p.dual_dim(i)) -
                                 want_y.segment(p.dual_offset(i), p.dual_dim(i)))
                                    .lpNorm<Eigen::Infinity>());
        worst = std::max(worst, (sx.segment(p.primal_offset(i), p.primal_dim(i)) -
                                 want_x.segment(p.primal_offset(i), p.primal_dim(i)))
                                    .lpNorm<Eigen::Infinity>());
      }
      x = std::move(nx);
      y = std::move(ny);
    }
  }
  v.require(worst <= kSyncTol, "max blockwise difference " + fmt_double(worst));
  std::cout << "  max blockwise difference " << fmt_double(worst) << '\n';
  return v;
}

// 3. Analytic dual gradient against central differences.
Verdict gradient_identity(const std::vector<NamedProblem>& instances) {
  Verdict v;
  double worst = 0.0;
  std::mt19937_64 rng(3);
  for (const auto& inst : instances) {
    for (int s = 0; s < kGradientSamples; ++s) {
      // Inequality multipliers kept clear of the boundary by more than h.
      const DualPoint y = random_dual(inst.problem, rng, 1.0, 1e-3);
      const Vector g = dual_value_and_gradient(inst.problem, y).gradient.stacked();
      const Vector fd = finite_diff_gradient(inst.problem, y);
      const double rel = (g - fd).norm() / std::max(1.0, g.norm());
      worst = std::max(worst, rel);
    }
  }
  v.require(worst <= kGradientRel, "max relative error " + fmt_double(worst));
  std::cout << "  max relative error " << fmt_double(worst) << " over " << instances.size() << " instances\n";
  return v;
}

struct AsyncOutcome {
  int target = 1;
  int realized = 1;
  Counter reached = -1;
  double final_ratio = 0.0;
  double tail_residual = 0.0;
  double worst_descent = 0.0;
  std::size_t residual_violations = 0;
  bool finite = true;
  double seconds = 0.0;
};

AsyncOutcome run_one(const Problem& p, const Vector& x_star, int q_target, std::uint64_t seed, double scale) {
  const auto t0 = Clock::now();
  AsyncOutcome out;
  out.target = q_target;
  Timeline t(preset_for_q(p.graph(), q_target, seed, kHorizon));
  out.realized = dry_run(t, kHorizon, false).realized_q;
  const ConstantsTable table =
      choose_gammas(compute_agent_constants(p, compute_theta_pairs(p)), out.realized, kDefaultSafety, scale);
  RunOptions o;
  o.horizon = kHorizon;
  o.reference_x = x_star;
  o.record_trace = false;
  o.record_every = 1;
  o.observer = [&](const UpdateObservation& ob) {
    if (ob.residual.dot(ob.stale_gradient) < ob.residual.squaredNorm() - kResidualSlack) ++out.residual_violations;
  };
  const SimulationResult r = run_async(p, table, t, o);
  if (r.trace.realized_q != out.realized) out.realized = -1;
  const double d0 = r.record.initial_dist;
  const Counter tail_start = kHorizon - kHorizon / 100;
  for (const auto& row : r.record.rows) {
    if (!std::isfinite(row.dist) || !std::isfinite(row.dual)) out.finite = false;
    if (out.reached < 0 && row.dist <= kDistRatio * d0) out.reached = row.k;
    if (row.k > tail_start) out.tail_residual = std::max(out.tail_residual, row.residual);
    out.worst_descent = std::max(out.worst_descent, r.record.initial_dual - row.dual);
  }
  out.final_ratio = r.record.rows.empty() ? 1.0 : r.record.rows.back().dist / d0;
  out.seconds = seconds_since(t0);
  return out;
}

// 4 and 7. Async convergence with steps at 0.99 of the bound; the residual inequality is checked along the way.
void async_convergence(const std::vector<NamedProblem>& instances, Verdict& conv, Verdict& residual_ineq) {
  for (const auto& inst : instances) {
    const auto t0 = Clock::now();
    ReferenceSolution ref = solve_reference(inst.problem);
    std::uint64_t seed = 0;
    for (int q : kQTargets) {
      const AsyncOutcome r = run_one(inst.problem, ref.x_star, q, seed++, 1.0);
      std::cout << "  " << inst.name << " Q-target " << q << " realized " << r.realized << ": reached 1e-4 at "
                << (r.reached < 0 ? std::string("never") : std::to_string(r.reached)) << ", final ratio "
                << fmt_double(r.final_ratio) << ", tail |s| " << fmt_double(r.tail_residual) << ", descent drop "
                << fmt_double(r.worst_descent) << ", " << fmt_double(r.seconds) << " s\n";
      const std::string tag = inst.name + " Q" + std::to_string(q);
      conv.require(r.realized >= 1 && r.realized <= q, tag + ": realized Q " + std::to_string(r.realized));
      conv.require(r.reached >= 0 && r.reached <= kHorizon, tag + ": distance ratio not reached");
      conv.require(r.tail_residual <= kFinalResidual, tag + ": tail residual " + fmt_double(r.tail_residual));
      conv.require(r.worst_descent <= kDescentSlack, tag + ": dual dropped by " + fmt_double(r.worst_descent));
      residual_ineq.require(r.residual_violations == 0, tag + ": " + std::to_string(r.residual_violations) + " violations");
    }
    const double secs = seconds_since(t0);
    conv.require(secs < kInstanceSeconds, inst.name + ": " + fmt_double(secs) + " s");
  }
}

// 5. Independent window and staleness checks on the event records.
Verdict window_checks(const std::vector<NamedProblem>& instances) {
  Verdict v;
  std::size_t schedules = 0;
  for (const auto& inst : instances) {
    std::uint64_t seed = 0;
    for (int q : kQTargets) {
      const ScheduleConfig cfg = preset_for_q(inst.problem.graph(), q, seed++, kHorizon);
      Timeline t(cfg);
      const int used = dry_run(t, kHorizon, false).realized_q;
      const Trace tr = dry_run(t, std::min(kHorizon, kRecordPrefix), true);
      const std::string tag = inst.name + " Q" + std::to_string(q);
      ++schedules;
      v.require(measure_q(tr) <= used, tag + ": measured " + std::to_string(measure_q(tr)));
      std::vector<std::vector<Counter>> active(tr.num_agents);
      for (const auto& r : tr.records) {
        if (r.tau > r.k || r.k - used > r.tau) {
          v.require(false, tag + ": tau " + std::to_string(r.tau) + " at k " + std::to_string(r.k));
          break;
        }
        if (active[r.agent].empty() || active[r.agent].back() != r.k) active[r.agent].push_back(r.k);
      }
      for (int i = 0; i < tr.num_agents; ++i) {
        // Every window {k, ..., k+Q-1} inside the horizon must contain an update of i.
        Counter prev = -1;
        bool ok = !active[i].empty();
        for (Counter k : active[i]) {
          ok = ok && k - prev <= used;
          prev = k;
        }
        ok = ok && tr.horizon - prev <= used;
        v.require(ok, tag + ": agent " + std::to_string(i) + " misses a window");
      }
    }
  }
  std::cout << "  " << schedules << " schedules, records over the first " << kRecordPrefix << " counters\n";
  return v;
}

// 6. Lipschitz bound of the local argmin map on sampled dual pairs.
Verdict argmin_lipschitz(const std::vector<NamedProblem>& instances) {
  Verdict v;
  std::size_t violations = 0, samples = 0;
  std::mt19937_64 rng(11);
  for (const auto& inst : instances) {
    const Problem& p = inst.problem;
    const ConstantsTable c = compute_agent_constants(p, compute_theta_pairs(p));
    for (int j = 0; j < p.num_agents(); ++j) {
      const double bound = c.agents[j].theta / p.cost(j).rho();
      for (int s = 0; s < kLipschitzSamples; ++s) {
        const DualPoint a = random_dual(p, rng, 5.0);
        const DualPoint b = random_dual(p, rng, 5.0);
        const Vector xa = local_argmin(p, j, aggregate_dual_term(p, j, a));
        const Vector xb = local_argmin(p, j, aggregate_dual_term(p, j, b));
        double sq = 0.0;
        for (AgentId l : p.neighbors(j)) sq += (a[l] - b[l]).squaredNorm();
        ++samples;
        if ((xa - xb).norm() > bound * std::sqrt(sq) + kLipschitzSlack) ++violations;
      }
    }
  }
  v.require(violations == 0, std::to_string(violations) + " violations");
  std::cout << "  " << samples << " pairs, " << violations << " violations\n";
  return v;
}

// 8. Strict decrease of the step bound in Q.
Verdict monotonicity(const std::vector<NamedProblem>& instances) {
  Verdict v;
  std::size_t checked = 0;
  for (const auto& inst : instances) {
    const ConstantsTable c = compute_agent_constants(inst.problem, compute_theta_pairs(inst.problem));
    for (int i = 0; i < c.size(); ++i) {
      double prev = step_size_bound(c, i, 1);
      for (int q = 2; q <= kMaxQ; ++q) {
        const double b = step_size_bound(c, i, q);
        ++checked;
        if (!(b < prev)) {
          v.require(false, inst.name + " agent " + std::to_string(i) + " at Q " + std::to_string(q));
          break;
        }
        prev = b;
      }
    }
  }
  std::cout << "  " << checked << " comparisons\n";
  return v;
}

// 9. Two identical runs give identical CSV bytes.
Verdict determinism(const std::vector<NamedProblem>& instances) {
  Verdict v;
  for (const auto& inst : instances) {
    const ReferenceSolution ref = solve_reference(inst.problem);
    auto once = [&] {
      ExperimentConfig cfg;
      cfg.q_targets = {25};
      cfg.seeds = {5};
      cfg.horizon = 5000;
      cfg.record_trace = true;
      const ScenarioResult r = run_async_scenario(inst.problem, preset_for_q(inst.problem.graph(), 25, 5, 5000),
                                                  ref.x_star, cfg.safety, 1.0, cfg, 25);
      std::ostringstream run, trace;
      write_run_csv(run, r.record);
      write_trace_csv(trace, r.trace);
      return std::make_pair(run.str(), trace.str());
    };
    const auto a = once();
    const auto b = once();
    v.require(a.first == b.first, inst.name + ": run CSV differs");
    v.require(a.second == b.second, inst.name + ": trace CSV differs");
    v.require(a.second.size() > 100, inst.name + ": trace is empty");
  }
  return v;
}

// 10. Steps one hundred times larger on the 14-bus case.
void demonstration(const NamedProblem& bus) {
  const ReferenceSolution ref = solve_reference(bus.problem);
  std::uint64_t seed = 0;
  for (int q : kDemoTargets) {
    const AsyncOutcome r = run_one(bus.problem, ref.x_star, q, seed++, 100.0);
    std::string outcome;
    if (!r.finite || r.final_ratio > 1.0) {
      outcome = "diverged";
    } else if (r.reached >= 0) {
      outcome = "converged";
    } else {
      outcome = "did not reach 1e-4";
    }
    std::cout << "  x100 " << bus.name << " Q-target " << q << " realized " << r.realized << ": " << outcome
              << ", final ratio " << fmt_double(r.final_ratio) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <ieee14.json>\n";
    return 2;
  }
  const auto t0 = Clock::now();
  const InstanceFile bus_file = load_instance(argv[1]);
  if (!validate_problem(bus_file.problem, bus_file.slater_candidate).passed()) {
    std::cerr << "bundled 14-bus instance does not validate\n";
    return 2;
  }
  const NamedProblem bus{"ieee14", bus_file.problem};
  std::vector<NamedProblem> random;
  for (int s = 0; s < kRandomInstances; ++s) {
    random.push_back({"random" + std::to_string(s), gen_random_instance(s, well_conditioned_family(6)).problem});
  }
  std::vector<NamedProblem> all{bus};
  all.insert(all.end(), random.begin(), random.end());
  for (int s = 0; s < 5; ++s) {
    all.push_back({"equality" + std::to_string(s), gen_random_instance(500 + s, equality_family(5)).problem});
  }

  std::vector<std::pair<int, std::string>> titles{
      {1, "oracle agreement (long run vs KKT, strong duality, < 10 s)"},
      {2, "synchronous distributed round equals centralized step (1e-12, 1000 steps)"},
      {3, "dual gradient vs central differences (relative 1e-4, 100 points per instance)"},
      {4, "async convergence with 0.99x the step bound (14-bus + 10 random, Q-class 1/25/50/100)"},
      {5, "realized Q bounds windows and staleness on every schedule"},
      {6, "local argmin Lipschitz bound on 1000 sampled pairs per agent"},
      {7, "residual inequality at every active step"},
      {8, "step bound strictly decreasing in Q"},
      {9, "byte-identical run and trace CSVs"},
  };
  std::vector<bool> passed(10, true);

  std::cout << "[1]\n";
  passed[1] = oracle_agreement().ok;
  report(1, titles[0].second, Verdict{passed[1]});
  std::cout << "[2]\n";
  passed[2] = sync_equals_centralized().ok;
  report(2, titles[1].second, Verdict{passed[2]});
  std::cout << "[3]\n";
  passed[3] = gradient_identity(all).ok;
  report(3, titles[2].second, Verdict{passed[3]});

  std::cout << "[4, 7]\n";
  std::vector<NamedProblem> conv_set{bus};
  conv_set.insert(conv_set.end(), random.begin(), random.end());
  Verdict conv, residual_ineq;
  async_convergence(conv_set, conv, residual_ineq);
  passed[4] = conv.ok;
  passed[7] = residual_ineq.ok;
  report(4, titles[3].second, conv);

  std::cout << "[5]\n";
  passed[5] = window_checks(conv_set).ok;
  report(5, titles[4].second, Verdict{passed[5]});
  std::cout << "[6]\n";
  passed[6] = argmin_lipschitz(all).ok;
  report(6, titles[5].second, Verdict{passed[6]});
  report(7, titles[6].second, residual_ineq);
  std::cout << "[8]\n";
  passed[8] = monotonicity(all).ok;
  report(8, titles[7].second, Verdict{passed[8]});
  std::cout << "[9]\n";
  passed[9] = determinism({bus, random[0]}).ok;
  report(9, titles[8].second, Verdict{passed[9]});

  std::cout << "[10]\n";
  demonstration(bus);
  std::cout << "criterion 10 REPORT  x100 step sizes on the 14-bus case (not asserted)\n";

  std::cout << "total " << fmt_double(seconds_since(t0)) << " s\n";
  return std::all_of(passed.begin() + 1, passed.end(), [](bool b) { return b; }) ? 0 : 1;
}
