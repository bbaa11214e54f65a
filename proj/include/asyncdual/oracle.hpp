#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "asyncdual/problem.hpp"

namespace asyncdual {

/// The whole program as stacked dense matrices:
///   min 1/2 x'Hx + q'x  s.t.  G x + e in -Omega,  lower <= x <= upper.
/// Rows of G follow the agent order, inequality rows first inside each agent.
struct GlobalForm {
  Matrix hessian;
  Vector linear;
  double offset = 0.0;
  Matrix coupling;
  Vector coupling_offset;
  std::vector<bool> ineq_row;
  Vector lower;
  Vector upper;
  std::vector<bool> boxed;
};

GlobalForm assemble_global(const Problem& problem);

enum class ReferenceMethod { Kkt, LongRun };

const char* to_string(ReferenceMethod m);

struct ReferenceResiduals {
  /// ||Hx + q + G'y||, only meaningful without boxes.
  double stationarity = 0.0;
  /// ||max(0, ineq)|| + ||eq||.
  double feasibility = 0.0;
  /// ||proj(y + gamma grad q(y)) - y|| / gamma at the returned y.
  double dual_step = 0.0;
};

struct ReferenceSolution {
  Vector x_star;
  DualPoint y_star;
  double f_star = 0.0;
  ReferenceMethod method = ReferenceMethod::Kkt;
  ReferenceResiduals residuals;
  std::size_t iterations = 0;
  /// Largest ||y|| seen along the iterates (long-run only).
  double max_dual_norm = 0.0;

  /// Agreement tolerance on x* that comparisons against this solution should use.
  double x_tolerance() const { return method == ReferenceMethod::Kkt ? 1e-6 : 1e-5; }
};

/// Solves [H G'; G 0][x; nu] = [-q; -e]. Needs an equality-only program without
/// boxes; throws SingularSystemError when the system has no unique solution.
ReferenceSolution kkt_solve(const Problem& problem);

struct ReferenceOptions {
  double tol = 1e-10;
  std::size_t max_iters = 2'000'000;
  std::optional<DualPoint> warm_start;
  /// Step is safety / max_i phi_i.
  double safety = 0.99;
};

/// Long-run synchronous dual ascent until the scaled dual step drops to tol.
/// Throws ConvergenceError with the best residual seen on failure.
ReferenceSolution reference_solve(const Problem& problem, const ReferenceOptions& options = {});

/// KKT when applicable, otherwise (or when the KKT system is singular) the long run.
ReferenceSolution solve_reference(const Problem& problem, const ReferenceOptions& options = {});

bool kkt_applicable(const Problem& problem);

/// Central differences of q, one coordinate at a time.
Vector finite_diff_gradient(const Problem& problem, const DualPoint& y, double h = 1e-5);

/// argmin of the Lagrangian computed from the global matrices (no per-agent code path).
Vector centralized_argmin(const GlobalForm& form, const Vector& y);

/// proj_Omega(y + gamma grad q(y)) computed from the global matrices.
Vector centralized_dual_step(const GlobalForm& form, const Vector& y, double gamma);

}  // namespace asyncdual
