#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "asyncdual/constants.hpp"
#include "asyncdual/errors.hpp"
#include "asyncdual/experiment.hpp"
#include "asyncdual/format.hpp"
#include "asyncdual/generators.hpp"
#include "asyncdual/instance_io.hpp"
#include "asyncdual/oracle.hpp"
#include "asyncdual/validation.hpp"

namespace fs = std::filesystem;
using namespace asyncdual;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitOracle = 2;
constexpr int kExitIo = 3;

InstanceFile load(const std::string& path) {
  InstanceFile f = load_instance(path);
  for (const auto& w : f.warnings) std::cerr << "warning: " << w << '\n';
  return f;
}

bool report_validation(const InstanceFile& f, bool verbose) {
  const ValidationReport r = validate_problem(f.problem, f.slater_candidate);
  for (const auto& c : r.checks) {
    if (verbose || c.status != CheckStatus::Pass) {
      std::cout << to_string(c.status) << "  " << c.name << "  " << c.detail << '\n';
    }
  }
  return r.passed();
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  return f;
}

void write_runs(const ExperimentResult& result, const fs::path& dir, bool traces) {
  for (const auto& r : result.runs) {
    auto f = open_out(dir / (r.label() + ".csv"));
    write_run_csv(f, r.record);
    if (traces) {
      auto t = open_out(dir / (r.label() + "_trace.csv"));
      write_trace_csv(t, r.trace);
    }
  }
}

PhiDenominator parse_phi(const std::string& s) {
  if (s == "owner") return PhiDenominator::Owner;
  if (s == "neighbor") return PhiDenominator::Neighbor;
  throw Error("phi denominator must be owner or neighbor");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous distributed dual ascent: simulator and experiment harness"};
  app.require_subcommand(1);

  std::string file;
  bool verbose = false;
  auto* validate = app.add_subcommand("validate", "Check the regularity assumptions of an instance");
  validate->add_option("file", file, "Instance JSON")->required();
  validate->add_flag("-v,--verbose", verbose, "Also list passing checks");

  int q = 1;
  double safety = kDefaultSafety;
  double scale = 1.0;
  std::string phi = "owner";
  std::string out_file;
  auto* constants = app.add_subcommand("constants", "Per-agent step-size constants as CSV");
  constants->add_option("file", file, "Instance JSON")->required();
  constants->add_option("--Q", q, "Asynchrony bound")->required()->check(CLI::PositiveNumber);
  constants->add_option("--safety", safety, "Fraction of the bound")->check(CLI::Range(0.0, 1.0));
  constants->add_option("--scale", scale, "Extra factor on the step sizes")->check(CLI::PositiveNumber);
  constants->add_option("--phi", phi, "phi denominator: owner or neighbor");
  constants->add_option("--out", out_file, "CSV file (default stdout)");

  std::string mode = "async";
  int q_target = 1;
  std::uint64_t seed = 0;
  Counter horizon = 200000;
  Counter record_every = 1;
  std::string out_dir = ".";
  bool traces = false;
  auto* solve = app.add_subcommand("solve", "Run one synchronous or asynchronous scenario");
  solve->add_option("file", file, "Instance JSON")->required();
  solve->add_option("--mode", mode, "sync or async")->check(CLI::IsMember({"sync", "async"}));
  solve->add_option("--Q-target", q_target, "Schedule preset")->check(CLI::PositiveNumber);
  solve->add_option("--safety", safety, "Fraction of the step bound")->check(CLI::Range(0.0, 1.0));
  solve->add_option("--scale", scale, "Extra factor on the step sizes")->check(CLI::PositiveNumber);
  solve->add_option("--seed", seed, "Schedule seed");
  solve->add_option("--horizon", horizon, "Global counters to run")->check(CLI::NonNegativeNumber);
  solve->add_option("--record-every", record_every, "Metric row stride")->check(CLI::PositiveNumber);
  solve->add_option("--phi", phi, "phi denominator: owner or neighbor");
  solve->add_option("--out", out_dir, "Output directory");
  solve->add_flag("--trace", traces, "Also write the staleness trace CSV");

  std::vector<int> q_list{1, 25, 50, 100};
  std::vector<double> scales{1.0};
  std::vector<std::uint64_t> seeds{0};
  bool no_sync = false;
  auto* sweep = app.add_subcommand("sweep", "Async runs over Q targets and step scales, plus the sync baseline");
  sweep->add_option("file", file, "Instance JSON")->required();
  sweep->add_option("--Q-list", q_list, "Q targets")->delimiter(',');
  sweep->add_option("--scale", scales, "Step scales")->delimiter(',');
  sweep->add_option("--seeds", seeds, "Schedule seeds")->delimiter(',');
  sweep->add_option("--safety", safety, "Fraction of the step bound")->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--horizon", horizon, "Global counters per run")->check(CLI::NonNegativeNumber);
  sweep->add_option("--record-every", record_every, "Metric row stride")->check(CLI::PositiveNumber);
  sweep->add_option("--phi", phi, "phi denominator: owner or neighbor");
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_flag("--no-sync", no_sync, "Skip the synchronous baseline");
  sweep->add_flag("--trace", traces, "Also write staleness trace CSVs");

  double tol = 1e-10;
  std::size_t max_iters = 2'000'000;
  auto* oracle = app.add_subcommand("oracle", "Reference solution (KKT or long-run dual ascent)");
  oracle->add_option("file", file, "Instance JSON")->required();
  oracle->add_option("--tol", tol, "Dual step tolerance of the long run")->check(CLI::PositiveNumber);
  oracle->add_option("--max-iters", max_iters, "Iteration cap of the long run");

  std::string kind;
  std::string gen_out;
  double epsilon = -1.0;
  int agents = 5;
  auto* gen = app.add_subcommand("gen", "Write a generated instance");
  gen->add_option("kind", kind, "ieee14, consensus, random or random-wc")
      ->required()
      ->check(CLI::IsMember({"ieee14", "consensus", "random", "random-wc"}));
  gen->add_option("--out", gen_out, "Instance JSON to write")->required();
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--agents", agents, "Number of agents")->check(CLI::PositiveNumber);
  gen->add_option("--epsilon", epsilon, "Phase regularization (ieee14)")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const InstanceFile f = load(file);
      return report_validation(f, verbose) ? 0 : kExitValidation;
    }

    if (*constants) {
      const InstanceFile f = load(file);
      const auto table = choose_gammas(
          compute_agent_constants(f.problem, compute_theta_pairs(f.problem), parse_phi(phi)), q, safety, scale);
      if (out_file.empty()) {
        write_constants_csv(std::cout, table);
      } else {
        auto o = open_out(out_file);
        write_constants_csv(o, table);
      }
      return 0;
    }

    if (*solve || *sweep) {
      const InstanceFile f = load(file);
      if (!report_validation(f, false)) return kExitValidation;
      ExperimentConfig cfg;
      cfg.safety = safety;
      cfg.horizon = horizon;
      cfg.record_every = record_every;
      cfg.record_trace = traces;
      cfg.phi_denominator = parse_phi(phi);
      cfg.reference.max_iters = max_iters;
      ExperimentResult result;
      if (*solve) {
        cfg.sync = mode == "sync";
        cfg.q_targets = {q_target};
        cfg.scales = {scale};
        cfg.seeds = {seed};
        result = run_experiment(f.problem, cfg);
      } else {
        cfg.q_targets = q_list;
        cfg.scales = scales;
        cfg.seeds = seeds;
        result = run_experiment(f.problem, cfg);
        if (!no_sync) {
          for (double s : scales) {
            result.runs.push_back(run_sync_scenario(f.problem, result.reference.x_star, safety, s, cfg));
          }
        }
      }
      write_runs(result, out_dir, traces);
      write_summary(std::cout, result);
      return 0;
    }

    if (*oracle) {
      const InstanceFile f = load(file);
      ReferenceOptions opts;
      opts.tol = tol;
      opts.max_iters = max_iters;
      const ReferenceSolution r = solve_reference(f.problem, opts);
      std::cout << "method " << to_string(r.method) << '\n'
                << "f_star " << fmt_double(r.f_star) << '\n'
                << "iterations " << r.iterations << '\n'
                << "feasibility " << fmt_double(r.residuals.feasibility) << '\n'
                << "stationarity " << fmt_double(r.residuals.stationarity) << '\n'
                << "dual_step " << fmt_double(r.residuals.dual_step) << '\n'
                << "max_dual_norm " << fmt_double(r.max_dual_norm) << '\n'
                << "x_star";
      for (Eigen::Index t = 0; t < r.x_star.size(); ++t) std::cout << ' ' << fmt_double(r.x_star[t]);
      std::cout << '\n';
      return 0;
    }

    if (*gen) {
      InstanceFile f;
      if (kind == "ieee14") {
        Ieee14Options o = ieee14_bundled_options();
        if (epsilon > 0.0) o.epsilon = epsilon;
        const DcOpfData d = ieee14_case(o);
        f.problem = gen_dc_opf_instance(d);
        f.slater_candidate = dc_opf_slater_point(d);
        f.name = "ieee14";
        f.description = ieee14_description(o);
      } else if (kind == "consensus") {
        std::vector<double> z, w;
        for (int i = 0; i < agents; ++i) {
          z.push_back(i + 1);
          w.push_back(1.0);
        }
        f.problem = gen_consensus_instance(z, w, path_graph(agents));
        f.name = "consensus";
        f.description = "consensus on a path graph, f_i(x) = (x - (i+1))^2 / 2";
      } else {
        const auto opts = kind == "random" ? equality_family(agents) : well_conditioned_family(agents);
        GeneratedInstance g = gen_random_instance(seed, opts);
        f.problem = std::move(g.problem);
        f.slater_candidate = g.slater;
        f.name = kind + "-" + std::to_string(seed);
      }
      save_instance(gen_out, f);
      return 0;
    }
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitIo;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConvergenceError& e) {
    std::cerr << "oracle did not converge: " << e.what() << '\n';
    return kExitOracle;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
