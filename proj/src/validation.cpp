#include "asyncdual/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SVD>

namespace asyncdual {

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass:
      return "PASS";
    case CheckStatus::Warn:
      return "WARN";
    case CheckStatus::Fail:
      return "FAIL";
  }
  return "?";
}

bool ValidationReport::passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const Check& c) { return c.status == CheckStatus::Fail; });
}

const Check* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

Matrix stacked_equality_matrix(const Problem& problem) {
  int rows = 0;
  for (int i = 0; i < problem.num_agents(); ++i) rows += problem.eq_rows(i);
  Matrix a = Matrix::Zero(rows, problem.total_primal_dim());
  int row = 0;
  for (int i = 0; i < problem.num_agents(); ++i) {
    const int r = problem.eq_rows(i);
    const auto& nb = problem.neighbors(i);
    for (std::size_t s = 0; s < nb.size(); ++s) {
      const auto& b = problem.block_at(i, static_cast<int>(s));
      a.block(row, problem.primal_offset(nb[s]), r, problem.primal_dim(nb[s])) = b.eq_matrix();
    }
    row += r;
  }
  return a;
}

namespace {

int numeric_rank(const Matrix& m, double abs_tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  return static_cast<int>((sv.array() > abs_tol).count());
}

Check check_convexity(const Problem& problem) {
  Check c{"strong_convexity", CheckStatus::Pass, ""};
  std::ostringstream bad;
  for (int i = 0; i < problem.num_agents(); ++i) {
    if (!(problem.cost(i).rho() > 0)) {
      c.status = CheckStatus::Fail;
      bad << " agent " << i << " (rho=" << problem.cost(i).rho() << ")";
    }
  }
  c.detail = c.status == CheckStatus::Pass ? "all local Hessians positive definite"
                                           : "not strongly convex:" + bad.str();
  return c;
}

Check check_box_interior(const Problem& problem) {
  Check c{"box_interior", CheckStatus::Pass, "every box has a nonempty interior"};
  std::ostringstream bad;
  for (int i = 0; i < problem.num_agents(); ++i) {
    const auto& box = problem.cost(i).box();
    if (!box) continue;
    for (Eigen::Index t = 0; t < box->lower.size(); ++t) {
      if (!(box->lower[t] < box->upper[t])) {
        c.status = CheckStatus::Fail;
        bad << " agent " << i << " coord " << t;
      }
    }
  }
  if (c.status == CheckStatus::Fail) c.detail = "degenerate box:" + bad.str();
  return c;
}

Check check_rank(const Problem& problem) {
  Check c{"equality_rank", CheckStatus::Pass, ""};
  const Matrix a = stacked_equality_matrix(problem);
  if (a.rows() == 0) {
    c.detail = "no equality constraints";
    return c;
  }
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& sv = svd.singularValues();
  const double tol = sv.size() > 0 ? kRankTolerance * sv(0) : 0.0;
  const int rank = sv.size() > 0 ? numeric_rank(a, tol) : 0;
  std::ostringstream msg;
  msg << "rank " << rank << " of " << a.rows() << " rows";
  if (rank == a.rows() && sv(0) > 0) {
    c.detail = msg.str();
    return c;
  }

  // Name the rows that add nothing to the span of the rows before them.
  c.status = CheckStatus::Fail;
  msg << "; dependent rows:";
  Matrix accepted(0, a.cols());
  int accepted_rank = 0;
  int row = 0;
  for (int i = 0; i < problem.num_agents(); ++i) {
    for (int t = 0; t < problem.eq_rows(i); ++t, ++row) {
      Matrix trial(accepted.rows() + 1, a.cols());
      trial << accepted, a.row(row);
      const int r = numeric_rank(trial, tol);
      if (r > accepted_rank) {
        accepted = std::move(trial);
        accepted_rank = r;
      } else {
        msg << " agent " << i << " eq row " << t << ";";
      }
    }
  }
  c.detail = msg.str();
  return c;
}

Check check_slater(const Problem& problem, const std::optional<Vector>& candidate) {
  Check c{"slater", CheckStatus::Pass, ""};
  if (!candidate) {
    c.status = CheckStatus::Warn;
    c.detail = "no strictly feasible candidate supplied; Slater condition not checked";
    return c;
  }
  if (candidate->size() != problem.total_primal_dim()) {
    c.status = CheckStatus::Fail;
    c.detail = "candidate has size " + std::to_string(candidate->size()) + ", expected " +
               std::to_string(problem.total_primal_dim());
    return c;
  }
  const PrimalPoint x = PrimalPoint::split(*candidate, problem.primal_dims());

  constexpr double inf = std::numeric_limits<double>::infinity();
  double box_margin = inf;
  for (int i = 0; i < problem.num_agents(); ++i) {
    const auto& box = problem.cost(i).box();
    if (!box) continue;
    for (Eigen::Index t = 0; t < x[i].size(); ++t) {
      if (std::isfinite(box->lower[t])) box_margin = std::min(box_margin, x[i][t] - box->lower[t]);
      if (std::isfinite(box->upper[t])) box_margin = std::min(box_margin, box->upper[t] - x[i][t]);
    }
  }

  const DualPoint g = constraint_values(problem, x);
  double ineq_margin = inf;
  double eq_residual = 0.0;
  double eq_scale = 1.0;
  for (int i = 0; i < problem.num_agents(); ++i) {
    const int p = problem.ineq_rows(i);
    if (p > 0) ineq_margin = std::min(ineq_margin, -g[i].head(p).maxCoeff());
    const int r = problem.eq_rows(i);
    if (r > 0) {
      eq_residual = std::max(eq_residual, g[i].tail(r).cwiseAbs().maxCoeff());
      for (AgentId j : problem.neighbors(i)) {
        const auto* b = problem.block(i, j);
        if (b->eq_offset().size() > 0) eq_scale = std::max(eq_scale, b->eq_offset().cwiseAbs().maxCoeff());
      }
    }
  }

  std::ostringstream msg;
  msg.precision(6);
  bool ok = true;
  if (box_margin != inf) {
    msg << "box margin " << box_margin << "; ";
    ok = ok && box_margin > 0;
  }
  if (ineq_margin != inf) {
    msg << "inequality margin " << ineq_margin << "; ";
    ok = ok && ineq_margin > 0;
  }
  msg << "equality residual " << eq_residual;
  ok = ok && eq_residual <= 1e-9 * eq_scale;
  c.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
  c.detail = msg.str();
  return c;
}

}  // namespace

ValidationReport validate_problem(const Problem& problem, const std::optional<Vector>& slater_candidate) {
  ValidationReport report;
  report.checks.push_back(check_convexity(problem));
  const bool sym = problem.graph().is_symmetric();
  report.checks.push_back({"graph_symmetric", sym ? CheckStatus::Pass : CheckStatus::Fail,
                           sym ? "undirected" : "neighbor lists are not symmetric"});
  const bool loops = problem.graph().has_self_loops();
  report.checks.push_back({"graph_self_loops", loops ? CheckStatus::Pass : CheckStatus::Fail,
                           loops ? "every agent neighbors itself" : "missing self-loop"});
  report.checks.push_back(check_box_interior(problem));
  report.checks.push_back(check_rank(problem));
  report.checks.push_back(check_slater(problem, slater_candidate));
  return report;
}

}  // namespace asyncdual
