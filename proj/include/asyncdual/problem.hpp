#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>

#include "asyncdual/graph.hpp"
#include "asyncdual/types.hpp"

namespace asyncdual {

/// Componentwise bounds; entries may be +-infinity.
struct Box {
  Vector lower;
  Vector upper;
};

/// f_i(x) = 1/2 x'Hx + q'x + c, restricted to an optional box.
///
/// Boxes are only accepted together with a diagonal Hessian so that the
/// minimizer of f_i + <x, lambda> stays a closed-form clamp.
class LocalCost {
 public:
  LocalCost() = default;

  static LocalCost dense(Matrix hessian, Vector linear, double offset = 0.0);
  static LocalCost diagonal(Vector hessian_diag, Vector linear, std::optional<Box> box = std::nullopt,
                            double offset = 0.0);

  int dim() const { return static_cast<int>(linear_.size()); }
  bool is_diagonal() const { return diagonal_; }
  const Matrix& hessian() const { return hessian_; }
  /// Only meaningful when is_diagonal().
  const Vector& hessian_diagonal() const { return diag_; }
  const Vector& linear() const { return linear_; }
  double offset() const { return offset_; }
  const std::optional<Box>& box() const { return box_; }
  /// Smallest Hessian eigenvalue (strong convexity modulus).
  double rho() const { return rho_; }

  /// Cost value ignoring the box indicator.
  double value(const Vector& x) const;
  bool in_domain(const Vector& x) const;

  /// argmin_x f(x) + <x, lambda>. Throws if the Hessian is not positive definite.
  Vector minimizer(const Vector& lambda) const;

 private:
  void finalize();

  Matrix hessian_;
  Vector diag_;
  Vector linear_;
  double offset_ = 0.0;
  std::optional<Box> box_;
  bool diagonal_ = false;
  double rho_ = 0.0;
  Eigen::LLT<Matrix> chol_;
};

/// Affine coupling g_{i,j}(x_j) = col(C x_j + d, A x_j - b), owned by agent i.
class CouplingBlock {
 public:
  CouplingBlock() = default;
  CouplingBlock(AgentId owner, AgentId source, Matrix ineq_matrix, Vector ineq_offset, Matrix eq_matrix,
                Vector eq_offset);

  static CouplingBlock zero(AgentId owner, AgentId source, int ineq_rows, int eq_rows, int source_dim);

  AgentId owner() const { return owner_; }
  AgentId source() const { return source_; }
  const Matrix& ineq_matrix() const { return ineq_matrix_; }
  const Vector& ineq_offset() const { return ineq_offset_; }
  const Matrix& eq_matrix() const { return eq_matrix_; }
  const Vector& eq_offset() const { return eq_offset_; }

  /// [C; A], the linear part of g_{i,j}.
  const Matrix& stacked() const { return stacked_; }
  /// col(d, -b), the constant part of g_{i,j}.
  const Vector& stacked_offset() const { return stacked_offset_; }

  Vector apply(const Vector& x) const { return stacked_ * x + stacked_offset_; }

 private:
  AgentId owner_ = 0;
  AgentId source_ = 0;
  Matrix ineq_matrix_;
  Vector ineq_offset_;
  Matrix eq_matrix_;
  Vector eq_offset_;
  Matrix stacked_;
  Vector stacked_offset_;
};

/// Number of inequality (p_i) and equality (r_i) rows owned by one agent.
struct ConstraintDims {
  int ineq = 0;
  int eq = 0;
  int total() const { return ineq + eq; }
};

/// The constraint-coupled program
///   min sum_i f_i(x_i)  s.t.  sum_{j in N_i} c_{i,j}(x_j) <= 0,  sum_{j in N_i} a_{i,j}(x_j) = 0.
class Problem {
 public:
  Problem() = default;

  /// Blocks may be given for any (owner, source) edge; absent edges get zero
  /// blocks. A block for a non-edge, or with mismatched sizes, throws
  /// DimensionError.
  Problem(Graph graph, std::vector<LocalCost> costs, std::vector<ConstraintDims> dims,
          std::vector<CouplingBlock> blocks);

  int num_agents() const { return graph_.size(); }
  const Graph& graph() const { return graph_; }
  const std::vector<AgentId>& neighbors(AgentId i) const { return graph_.neighbors(i); }
  const LocalCost& cost(AgentId i) const { return costs_.at(i); }
  const std::vector<LocalCost>& costs() const { return costs_; }

  int primal_dim(AgentId i) const { return costs_.at(i).dim(); }
  int ineq_rows(AgentId i) const { return dims_.at(i).ineq; }
  int eq_rows(AgentId i) const { return dims_.at(i).eq; }
  int dual_dim(AgentId i) const { return dims_.at(i).total(); }
  const ConstraintDims& dims(AgentId i) const { return dims_.at(i); }

  int total_primal_dim() const { return primal_offsets_.back(); }
  int total_dual_dim() const { return dual_offsets_.back(); }
  int primal_offset(AgentId i) const { return primal_offsets_.at(i); }
  int dual_offset(AgentId i) const { return dual_offsets_.at(i); }
  std::vector<int> primal_dims() const;
  std::vector<int> dual_dims() const;

  /// Block owned by i acting on x_j; nullptr when j is not a neighbor of i.
  const CouplingBlock* block(AgentId owner, AgentId source) const;
  /// Block for the slot-th neighbor of owner.
  const CouplingBlock& block_at(AgentId owner, int slot) const { return blocks_.at(owner).at(slot); }

 private:
  Graph graph_;
  std::vector<LocalCost> costs_;
  std::vector<ConstraintDims> dims_;
  std::vector<std::vector<CouplingBlock>> blocks_;  // blocks_[i][slot] <-> neighbors(i)[slot]
  std::vector<int> primal_offsets_{0};
  std::vector<int> dual_offsets_{0};
};

/// g_{i,j}(x_j); the zero vector of size m_i when j is not a neighbor of i.
Vector eval_coupling(const Problem& problem, AgentId i, AgentId j, const Vector& xj);

/// Projection onto R_{>=0}^{p} x R^{r}.
Vector project_omega(int ineq_rows, const Vector& v);
Vector project_omega(const Problem& problem, AgentId i, const Vector& v);
DualPoint project_omega(const Problem& problem, const DualPoint& y);

/// sum_{j in N_i} G_{j,i}' y_j, with neighbor_duals[s] the dual of neighbors(i)[s].
Vector aggregate_dual_term(const Problem& problem, AgentId i, std::span<const Vector> neighbor_duals);
Vector aggregate_dual_term(const Problem& problem, AgentId i, const DualPoint& y);

/// argmin_x f_i(x) + <x, lambda>.
Vector local_argmin(const Problem& problem, AgentId i, const Vector& lambda);

/// x*(y) for every agent.
PrimalPoint primal_response(const Problem& problem, const DualPoint& y);

/// sum_{j in N_i} g_{i,j}(x_j) for every owner i.
DualPoint constraint_values(const Problem& problem, const PrimalPoint& x);

double objective(const Problem& problem, const PrimalPoint& x);

/// ||max(0, ineq)|| + ||eq residual||.
double feasibility_violation(const Problem& problem, const PrimalPoint& x);

struct DualEvaluation {
  double value = 0.0;
  DualPoint gradient;
  PrimalPoint primal;
};

/// q(y) and grad q(y) = g(x*(y)).
DualEvaluation dual_value_and_gradient(const Problem& problem, const DualPoint& y);

/// Spectral norm from a dense SVD (Jacobi when small, divide and conquer
/// otherwise). power_iteration_norm() is an independent cross-check.
double spectral_norm(const Matrix& m);
double power_iteration_norm(const Matrix& m, double rel_tol = 1e-10, int max_iters = 10000);

/// Tight Lipschitz constant of g_{i,j}: ||[C_{i,j}; A_{i,j}]||_2, zero off-graph.
double coupling_lipschitz(const Problem& problem, AgentId i, AgentId j);

}  // namespace asyncdual
