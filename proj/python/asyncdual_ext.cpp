#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "asyncdual/constants.hpp"
#include "asyncdual/errors.hpp"
#include "asyncdual/experiment.hpp"
#include "asyncdual/generators.hpp"
#include "asyncdual/instance_io.hpp"
#include "asyncdual/oracle.hpp"
#include "asyncdual/validation.hpp"

namespace py = pybind11;
using namespace asyncdual;

namespace {

PhiDenominator parse_phi(const std::string& s) {
  if (s == "owner") return PhiDenominator::Owner;
  if (s == "neighbor") return PhiDenominator::Neighbor;
  throw py::value_error("phi must be 'owner' or 'neighbor'");
}

py::dict rows_to_dict(const RunRecord& rec) {
  const auto n = static_cast<Eigen::Index>(rec.rows.size());
  Eigen::VectorXd k(n), avg(n), dist(n), dual(n), feas(n), res(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const RunRow& r = rec.rows[t];
    k[t] = static_cast<double>(r.k);
    avg[t] = r.avg_updates;
    dist[t] = r.dist;
    dual[t] = r.dual;
    feas[t] = r.feas;
    res[t] = r.residual;
  }
  py::dict d;
  d["k"] = k;
  d["avg_updates"] = avg;
  d["dist"] = dist;
  d["dual"] = dual;
  d["feas"] = feas;
  d["residual"] = res;
  return d;
}

py::dict scenario_to_dict(const ScenarioResult& r) {
  py::dict d;
  d["label"] = r.label();
  d["mode"] = r.mode;
  d["q_target"] = r.q_target;
  d["realized_q"] = r.realized_q;
  d["scale"] = r.scale;
  d["seed"] = r.seed;
  d["admissible"] = r.admissible;
  d["gamma"] = r.gamma;
  d["initial_dist"] = r.record.initial_dist;
  d["initial_dual"] = r.record.initial_dual;
  d["final_dist_ratio"] = r.final_dist_ratio();
  d["rows"] = rows_to_dict(r.record);
  std::ostringstream csv;
  write_run_csv(csv, r.record);
  d["csv"] = csv.str();
  return d;
}

}  // namespace

PYBIND11_MODULE(_asyncdual, m) {
  m.doc() = "Asynchronous distributed dual ascent: instances, step-size constants, simulator and oracles.";

  // Translators run newest first, so the base class goes in first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  py::class_<Problem>(m, "Problem")
      .def_property_readonly("num_agents", &Problem::num_agents)
      .def_property_readonly("primal_dim", &Problem::total_primal_dim)
      .def_property_readonly("dual_dim", &Problem::total_dual_dim)
      .def("neighbors", &Problem::neighbors, py::arg("agent"))
      .def("to_json", [](const Problem& p) {
        InstanceFile f;
        f.problem = p;
        return serialize_instance(f);
      });

  m.def(
      "load_instance",
      [](const std::string& path) { return load_instance(path).problem; }, py::arg("path"));
  m.def(
      "parse_instance", [](const std::string& text) { return parse_instance(text).problem; }, py::arg("text"));
  m.def("ieee14", [] { return gen_dc_opf_instance(ieee14_case(ieee14_bundled_options())); });
  m.def(
      "random_instance",
      [](std::uint64_t seed, int agents, bool equality_only) {
        return gen_random_instance(seed, equality_only ? equality_family(agents) : well_conditioned_family(agents))
            .problem;
      },
      py::arg("seed"), py::arg("agents") = 6, py::arg("equality_only") = false);
  m.def(
      "consensus",
      [](const std::vector<double>& z, const std::vector<double>& w) {
        return gen_consensus_instance(z, w, path_graph(static_cast<int>(z.size())));
      },
      py::arg("minimizers"), py::arg("weights"));

  m.def(
      "validate",
      [](const Problem& p) {
        const ValidationReport r = validate_problem(p);
        py::list out;
        for (const auto& c : r.checks) out.append(py::make_tuple(c.name, to_string(c.status), c.detail));
        return py::make_tuple(r.passed(), out);
      },
      py::arg("problem"), "(passed, [(check, status, detail), ...])");

  m.def(
      "constants",
      [](const Problem& p, int q, double safety, double scale, const std::string& phi) {
        const ConstantsTable t =
            choose_gammas(compute_agent_constants(p, compute_theta_pairs(p), parse_phi(phi)), q, safety, scale);
        py::dict d;
        std::vector<double> theta, ph, ell, xi;
        for (const auto& a : t.agents) {
          theta.push_back(a.theta);
          ph.push_back(a.phi);
          ell.push_back(a.ell);
          xi.push_back(a.xi);
        }
        d["theta"] = theta;
        d["phi"] = ph;
        d["ell"] = ell;
        d["xi"] = xi;
        d["gamma_max"] = t.gamma_max;
        d["gamma"] = t.gamma;
        d["admissible"] = t.admissible;
        return d;
      },
      py::arg("problem"), py::arg("Q"), py::arg("safety") = kDefaultSafety, py::arg("scale") = 1.0,
      py::arg("phi") = "owner");

  m.def(
      "reference",
      [](const Problem& p, double tol, std::size_t max_iters) {
        ReferenceOptions o;
        o.tol = tol;
        o.max_iters = max_iters;
        ReferenceSolution r;
        {
          py::gil_scoped_release release;
          r = solve_reference(p, o);
        }
        py::dict d;
        d["method"] = std::string(to_string(r.method));
        d["x_star"] = r.x_star;
        d["y_star"] = r.y_star.stacked();
        d["f_star"] = r.f_star;
        d["iterations"] = r.iterations;
        return d;
      },
      py::arg("problem"), py::arg("tol") = 1e-10, py::arg("max_iters") = 2000000);

  m.def(
      "solve",
      [](const Problem& p, int q_target, std::uint64_t seed, Counter horizon, double scale, double safety,
         Counter record_every, bool sync) {
        ExperimentConfig c;
        c.sync = sync;
        c.q_targets = {q_target};
        c.seeds = {seed};
        c.scales = {scale};
        c.safety = safety;
        c.horizon = horizon;
        c.record_every = record_every;
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(p, c);
        }
        return scenario_to_dict(r.runs.at(0));
      },
      py::arg("problem"), py::arg("Q_target") = 1, py::arg("seed") = 0, py::arg("horizon") = 10000,
      py::arg("scale") = 1.0, py::arg("safety") = kDefaultSafety, py::arg("record_every") = 1, py::arg("sync") = false,
      "One scenario; returns metadata, metric columns and the run CSV text.");
}
