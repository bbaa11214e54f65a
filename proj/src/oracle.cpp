#include "asyncdual/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "asyncdual/agents.hpp"
#include "asyncdual/constants.hpp"
#include "asyncdual/errors.hpp"

namespace asyncdual {

namespace {

bool has_any_box(const Problem& problem) {
  for (const auto& c : problem.costs()) {
    if (c.box()) return true;
  }
  return false;
}

double dual_step_residual(const Problem& problem, const DualPoint& y, double gamma) {
  const auto ev = dual_value_and_gradient(problem, y);
  double sq = 0.0;
  for (int i = 0; i < problem.num_agents(); ++i) {
    sq += (project_omega(problem, i, y[i] + gamma * ev.gradient[i]) - y[i]).squaredNorm();
  }
  return std::sqrt(sq) / gamma;
}

}  // namespace

const char* to_string(ReferenceMethod m) { return m == ReferenceMethod::Kkt ? "kkt" : "long-run"; }

GlobalForm assemble_global(const Problem& problem) {
  const int n = problem.total_primal_dim();
  const int m = problem.total_dual_dim();
  GlobalForm g;
  g.hessian = Matrix::Zero(n, n);
  g.linear = Vector::Zero(n);
  g.coupling = Matrix::Zero(m, n);
  g.coupling_offset = Vector::Zero(m);
  g.ineq_row.assign(m, false);
  g.lower = Vector::Constant(n, -std::numeric_limits<double>::infinity());
  g.upper = Vector::Constant(n, std::numeric_limits<double>::infinity());
  g.boxed.assign(n, false);

  for (int i = 0; i < problem.num_agents(); ++i) {
    const auto& c = problem.cost(i);
    const int po = problem.primal_offset(i);
    const int ni = c.dim();
    g.hessian.block(po, po, ni, ni) = c.hessian();
    g.linear.segment(po, ni) = c.linear();
    g.offset += c.offset();
    if (c.box()) {
      g.lower.segment(po, ni) = c.box()->lower;
      g.upper.segment(po, ni) = c.box()->upper;
      for (int t = 0; t < ni; ++t) g.boxed[po + t] = true;
    }
    const int dof = problem.dual_offset(i);
    for (int t = 0; t < problem.ineq_rows(i); ++t) g.ineq_row[dof + t] = true;
    const auto& nb = problem.neighbors(i);
    for (std::size_t s = 0; s < nb.size(); ++s) {
      const auto& blk = problem.block_at(i, static_cast<int>(s));
      g.coupling.block(dof, problem.primal_offset(nb[s]), problem.dual_dim(i), problem.primal_dim(nb[s])) =
          blk.stacked();
      g.coupling_offset.segment(dof, problem.dual_dim(i)) += blk.stacked_offset();
    }
  }
  return g;
}

bool kkt_applicable(const Problem& problem) {
  for (int i = 0; i < problem.num_agents(); ++i) {
    if (problem.ineq_rows(i) > 0) return false;
  }
  return !has_any_box(problem);
}

ReferenceSolution kkt_solve(const Problem& problem) {
  for (int i = 0; i < problem.num_agents(); ++i) {
    if (problem.ineq_rows(i) > 0) throw Error("KKT solve needs an equality-only program (agent " + std::to_string(i) + " has inequality rows)");
  }
  if (has_any_box(problem)) throw Error("KKT solve needs a program without box domains");

  const GlobalForm g = assemble_global(problem);
  const int n = static_cast<int>(g.linear.size());
  const int m = static_cast<int>(g.coupling_offset.size());
  Matrix kkt = Matrix::Zero(n + m, n + m);
  kkt.topLeftCorner(n, n) = g.hessian;
  kkt.topRightCorner(n, m) = g.coupling.transpose();
  kkt.bottomLeftCorner(m, n) = g.coupling;
  Vector rhs(n + m);
  rhs << -g.linear, -g.coupling_offset;

  Eigen::FullPivLU<Matrix> lu(kkt);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw SingularSystemError("KKT system is singular (rank " + std::to_string(lu.rank()) + " of " +
                              std::to_string(n + m) + "); the equality rows are likely dependent");
  }
  const Vector sol = lu.solve(rhs);

  ReferenceSolution r;
  r.method = ReferenceMethod::Kkt;
  r.x_star = sol.head(n);
  r.y_star = DualPoint::split(sol.tail(m), problem.dual_dims());
  const auto x = PrimalPoint::split(r.x_star, problem.primal_dims());
  r.f_star = objective(problem, x);
  r.residuals.stationarity = (g.hessian * r.x_star + g.linear + g.coupling.transpose() * sol.tail(m)).norm();
  r.residuals.feasibility = feasibility_violation(problem, x);
  const double gamma = sync_step_size(problem, compute_theta_pairs(problem));
  r.residuals.dual_step = dual_step_residual(problem, r.y_star, gamma);
  r.max_dual_norm = sol.tail(m).norm();
  return r;
}

ReferenceSolution reference_solve(const Problem& problem, const ReferenceOptions& options) {
  const double gamma = sync_step_size(problem, compute_theta_pairs(problem), options.safety);
  DualPoint y;
  if (options.warm_start) {
    if (static_cast<int>(options.warm_start->size()) != problem.num_agents()) throw DimensionError("warm start has the wrong agent count");
    y = project_omega(problem, *options.warm_start);
  } else {
    for (int i = 0; i < problem.num_agents(); ++i) y.blocks.push_back(Vector::Zero(problem.dual_dim(i)));
  }

  PrimalPoint x = primal_response(problem, y);
  double best = std::numeric_limits<double>::infinity();
  double max_norm = y.stacked().norm();
  std::size_t it = 0;
  while (true) {
    // One synchronous round: x+ = x*(y), y+ = proj(y + gamma g(x+)).
    auto [nx, ny] = sync_iteration(problem, gamma, x, y);
    const double residual = (ny.stacked() - y.stacked()).norm() / gamma;
    best = std::min(best, residual);
    if (residual <= options.tol) {
      x = std::move(nx);
      break;
    }
    if (it >= options.max_iters) {
      throw ConvergenceError("reference solve did not reach tolerance " + std::to_string(options.tol) + " in " +
                                 std::to_string(options.max_iters) + " iterations (best residual " +
                                 std::to_string(best) + ")",
                             best, it);
    }
    x = std::move(nx);
    y = std::move(ny);
    max_norm = std::max(max_norm, y.stacked().norm());
    ++it;
  }

  ReferenceSolution r;
  r.method = ReferenceMethod::LongRun;
  r.x_star = x.stacked();
  r.y_star = y;
  r.f_star = objective(problem, x);
  r.iterations = it;
  r.max_dual_norm = max_norm;
  r.residuals.feasibility = feasibility_violation(problem, x);
  r.residuals.dual_step = best;
  if (!has_any_box(problem)) {
    const GlobalForm g = assemble_global(problem);
    r.residuals.stationarity = (g.hessian * r.x_star + g.linear + g.coupling.transpose() * y.stacked()).norm();
  }
  return r;
}

ReferenceSolution solve_reference(const Problem& problem, const ReferenceOptions& options) {
  if (kkt_applicable(problem)) {
    try {
      return kkt_solve(problem);
    } catch (const SingularSystemError&) {
    }
  }
  return reference_solve(problem, options);
}

Vector finite_diff_gradient(const Problem& problem, const DualPoint& y, double h) {
  const Vector base = y.stacked();
  const auto dims = problem.dual_dims();
  Vector grad(base.size());
  for (Eigen::Index t = 0; t < base.size(); ++t) {
    Vector plus = base;
    Vector minus = base;
    plus[t] += h;
    minus[t] -= h;
    const double qp = dual_value_and_gradient(problem, DualPoint::split(plus, dims)).value;
    const double qm = dual_value_and_gradient(problem, DualPoint::split(minus, dims)).value;
    grad[t] = (qp - qm) / (2.0 * h);
  }
  return grad;
}

Vector centralized_argmin(const GlobalForm& form, const Vector& y) {
  const Vector rhs = -(form.linear + form.coupling.transpose() * y);
  const Eigen::Index n = rhs.size();
  Vector x = Vector::Zero(n);
  // Boxed coordinates carry a diagonal Hessian, so they separate from the rest.
  std::vector<Eigen::Index> free_idx;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (form.boxed[t]) {
      x[t] = std::clamp(rhs[t] / form.hessian(t, t), form.lower[t], form.upper[t]);
    } else {
      free_idx.push_back(t);
    }
  }
  if (!free_idx.empty()) {
    const auto f = static_cast<Eigen::Index>(free_idx.size());
    Matrix hff(f, f);
    Vector bf(f);
    for (Eigen::Index a = 0; a < f; ++a) {
      bf[a] = rhs[free_idx[a]];
      for (Eigen::Index b = 0; b < f; ++b) hff(a, b) = form.hessian(free_idx[a], free_idx[b]);
    }
    const Vector xf = hff.llt().solve(bf);
    for (Eigen::Index a = 0; a < f; ++a) x[free_idx[a]] = xf[a];
  }
  return x;
}

Vector centralized_dual_step(const GlobalForm& form, const Vector& y, double gamma) {
  const Vector x = centralized_argmin(form, y);
  Vector next = y + gamma * (form.coupling * x + form.coupling_offset);
  for (Eigen::Index t = 0; t < next.size(); ++t) {
    if (form.ineq_row[t]) next[t] = std::max(0.0, next[t]);
  }
  return next;
}

}  // namespace asyncdual
