#include "asyncdual/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "asyncdual/errors.hpp"

namespace asyncdual {

namespace {

std::string pair_str(AgentId i, AgentId j) { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }

void require_size(Eigen::Index got, Eigen::Index want, const std::string& what) {
  if (got != want) {
    throw DimensionError(what + ": expected size " + std::to_string(want) + ", got " + std::to_string(got));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// LocalCost

LocalCost LocalCost::dense(Matrix hessian, Vector linear, double offset) {
  if (hessian.rows() != hessian.cols()) throw DimensionError("Hessian must be square");
  require_size(hessian.rows(), linear.size(), "Hessian rows vs linear term");
  const double scale = std::max(1.0, hessian.cwiseAbs().maxCoeff());
  if ((hessian - hessian.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DimensionError("Hessian must be symmetric");
  }
  LocalCost c;
  c.hessian_ = std::move(hessian);
  c.linear_ = std::move(linear);
  c.offset_ = offset;
  c.diagonal_ = false;
  c.finalize();
  return c;
}

LocalCost LocalCost::diagonal(Vector hessian_diag, Vector linear, std::optional<Box> box, double offset) {
  require_size(hessian_diag.size(), linear.size(), "Hessian diagonal vs linear term");
  if (box) {
    require_size(box->lower.size(), linear.size(), "box lower bound");
    require_size(box->upper.size(), linear.size(), "box upper bound");
    for (Eigen::Index t = 0; t < linear.size(); ++t) {
      if (std::isnan(box->lower[t]) || std::isnan(box->upper[t]) || box->lower[t] > box->upper[t]) {
        throw DimensionError("empty box in coordinate " + std::to_string(t));
      }
    }
  }
  LocalCost c;
  c.diag_ = std::move(hessian_diag);
  c.hessian_ = c.diag_.asDiagonal();
  c.linear_ = std::move(linear);
  c.offset_ = offset;
  c.box_ = std::move(box);
  c.diagonal_ = true;
  c.finalize();
  return c;
}

void LocalCost::finalize() {
  if (dim() == 0) {
    rho_ = std::numeric_limits<double>::infinity();
    return;
  }
  if (diagonal_) {
    rho_ = diag_.minCoeff();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian_, Eigen::EigenvaluesOnly);
    rho_ = eig.eigenvalues().minCoeff();
    if (rho_ > 0) chol_.compute(hessian_);
  }
}

double LocalCost::value(const Vector& x) const {
  require_size(x.size(), dim(), "cost argument");
  if (diagonal_) return 0.5 * x.dot(diag_.cwiseProduct(x)) + linear_.dot(x) + offset_;
  return 0.5 * x.dot(hessian_ * x) + linear_.dot(x) + offset_;
}

bool LocalCost::in_domain(const Vector& x) const {
  if (!box_) return true;
  return (x.array() >= box_->lower.array()).all() && (x.array() <= box_->upper.array()).all();
}

Vector LocalCost::minimizer(const Vector& lambda) const {
  require_size(lambda.size(), dim(), "dual term");
  if (!(rho_ > 0)) throw Error("local cost Hessian is not positive definite");
  if (diagonal_) {
    Vector x = (-(linear_ + lambda)).cwiseQuotient(diag_);
    if (box_) x = x.cwiseMax(box_->lower).cwiseMin(box_->upper);
    return x;
  }
  return -chol_.solve(linear_ + lambda);
}

// ---------------------------------------------------------------------------
// CouplingBlock

CouplingBlock::CouplingBlock(AgentId owner, AgentId source, Matrix ineq_matrix, Vector ineq_offset,
                             Matrix eq_matrix, Vector eq_offset)
    : owner_(owner),
      source_(source),
      ineq_matrix_(std::move(ineq_matrix)),
      ineq_offset_(std::move(ineq_offset)),
      eq_matrix_(std::move(eq_matrix)),
      eq_offset_(std::move(eq_offset)) {
  const std::string where = "coupling block " + pair_str(owner, source);
  require_size(ineq_offset_.size(), ineq_matrix_.rows(), where + " inequality offset");
  require_size(eq_offset_.size(), eq_matrix_.rows(), where + " equality offset");
  require_size(eq_matrix_.cols(), ineq_matrix_.cols(), where + " column count");
  const Eigen::Index p = ineq_matrix_.rows();
  const Eigen::Index r = eq_matrix_.rows();
  stacked_.resize(p + r, ineq_matrix_.cols());
  stacked_ << ineq_matrix_, eq_matrix_;
  stacked_offset_.resize(p + r);
  stacked_offset_ << ineq_offset_, -eq_offset_;
}

CouplingBlock CouplingBlock::zero(AgentId owner, AgentId source, int ineq_rows, int eq_rows, int source_dim) {
  return CouplingBlock(owner, source, Matrix::Zero(ineq_rows, source_dim), Vector::Zero(ineq_rows),
                       Matrix::Zero(eq_rows, source_dim), Vector::Zero(eq_rows));
}

// ---------------------------------------------------------------------------
// Problem

Problem::Problem(Graph graph, std::vector<LocalCost> costs, std::vector<ConstraintDims> dims,
                 std::vector<CouplingBlock> blocks)
    : graph_(std::move(graph)), costs_(std::move(costs)), dims_(std::move(dims)) {
  const int n = graph_.size();
  require_size(static_cast<Eigen::Index>(costs_.size()), n, "cost count");
  require_size(static_cast<Eigen::Index>(dims_.size()), n, "constraint dims count");
  for (int i = 0; i < n; ++i) {
    if (dims_[i].ineq < 0 || dims_[i].eq < 0) throw DimensionError("negative constraint count");
    primal_offsets_.push_back(primal_offsets_.back() + costs_[i].dim());
    dual_offsets_.push_back(dual_offsets_.back() + dims_[i].total());
  }

  std::vector<std::vector<char>> seen(n);
  blocks_.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& nb = graph_.neighbors(i);
    seen[i].assign(nb.size(), 0);
    blocks_[i].resize(nb.size());
  }
  for (auto& b : blocks) {
    const AgentId i = b.owner();
    const AgentId j = b.source();
    if (i < 0 || i >= n || j < 0 || j >= n) throw DimensionError("coupling block " + pair_str(i, j) + " out of range");
    const int s = graph_.slot(i, j);
    if (s < 0) throw DimensionError("coupling block " + pair_str(i, j) + " is not on an edge of the graph");
    if (seen[i][s]) throw DimensionError("duplicate coupling block " + pair_str(i, j));
    const std::string where = "coupling block " + pair_str(i, j);
    require_size(b.ineq_matrix().rows(), dims_[i].ineq, where + " inequality rows");
    require_size(b.eq_matrix().rows(), dims_[i].eq, where + " equality rows");
    require_size(b.stacked().cols(), costs_[j].dim(), where + " columns");
    seen[i][s] = 1;
    blocks_[i][s] = std::move(b);
  }
  for (int i = 0; i < n; ++i) {
    const auto& nb = graph_.neighbors(i);
    for (std::size_t s = 0; s < nb.size(); ++s) {
      if (!seen[i][s]) blocks_[i][s] = CouplingBlock::zero(i, nb[s], dims_[i].ineq, dims_[i].eq, costs_[nb[s]].dim());
    }
  }
}

std::vector<int> Problem::primal_dims() const {
  std::vector<int> d;
  for (const auto& c : costs_) d.push_back(c.dim());
  return d;
}

std::vector<int> Problem::dual_dims() const {
  std::vector<int> d;
  for (const auto& c : dims_) d.push_back(c.total());
  return d;
}

const CouplingBlock* Problem::block(AgentId owner, AgentId source) const {
  const int s = graph_.slot(owner, source);
  if (s < 0) return nullptr;
  return &blocks_[owner][s];
}

// ---------------------------------------------------------------------------
// Operations

Vector eval_coupling(const Problem& problem, AgentId i, AgentId j, const Vector& xj) {
  require_size(xj.size(), problem.primal_dim(j), "x_" + std::to_string(j));
  const CouplingBlock* b = problem.block(i, j);
  if (b == nullptr) return Vector::Zero(problem.dual_dim(i));
  return b->apply(xj);
}

Vector project_omega(int ineq_rows, const Vector& v) {
  if (ineq_rows < 0 || ineq_rows > v.size()) throw DimensionError("inequality rows exceed dual block size");
  Vector out = v;
  out.head(ineq_rows) = out.head(ineq_rows).cwiseMax(0.0);
  return out;
}

Vector project_omega(const Problem& problem, AgentId i, const Vector& v) {
  require_size(v.size(), problem.dual_dim(i), "dual block " + std::to_string(i));
  return project_omega(problem.ineq_rows(i), v);
}

DualPoint project_omega(const Problem& problem, const DualPoint& y) {
  DualPoint out;
  out.blocks.reserve(y.size());
  for (int i = 0; i < problem.num_agents(); ++i) out.blocks.push_back(project_omega(problem, i, y[i]));
  return out;
}

Vector aggregate_dual_term(const Problem& problem, AgentId i, std::span<const Vector> neighbor_duals) {
  const auto& nb = problem.neighbors(i);
  require_size(static_cast<Eigen::Index>(neighbor_duals.size()), static_cast<Eigen::Index>(nb.size()),
               "neighbor dual count of agent " + std::to_string(i));
  Vector lambda = Vector::Zero(problem.primal_dim(i));
  for (std::size_t s = 0; s < nb.size(); ++s) {
    const CouplingBlock* b = problem.block(nb[s], i);
    if (b == nullptr) continue;
    require_size(neighbor_duals[s].size(), problem.dual_dim(nb[s]), "dual of agent " + std::to_string(nb[s]));
    lambda.noalias() += b->stacked().transpose() * neighbor_duals[s];
  }
  return lambda;
}

Vector aggregate_dual_term(const Problem& problem, AgentId i, const DualPoint& y) {
  const auto& nb = problem.neighbors(i);
  std::vector<Vector> duals;
  duals.reserve(nb.size());
  for (AgentId j : nb) duals.push_back(y[j]);
  return aggregate_dual_term(problem, i, duals);
}

Vector local_argmin(const Problem& problem, AgentId i, const Vector& lambda) {
  return problem.cost(i).minimizer(lambda);
}

PrimalPoint primal_response(const Problem& problem, const DualPoint& y) {
  require_size(static_cast<Eigen::Index>(y.size()), problem.num_agents(), "dual point");
  PrimalPoint x;
  x.blocks.reserve(y.size());
  for (int i = 0; i < problem.num_agents(); ++i) {
    x.blocks.push_back(local_argmin(problem, i, aggregate_dual_term(problem, i, y)));
  }
  return x;
}

DualPoint constraint_values(const Problem& problem, const PrimalPoint& x) {
  require_size(static_cast<Eigen::Index>(x.size()), problem.num_agents(), "primal point");
  DualPoint g;
  g.blocks.reserve(x.size());
  for (int i = 0; i < problem.num_agents(); ++i) {
    Vector gi = Vector::Zero(problem.dual_dim(i));
    const auto& nb = problem.neighbors(i);
    for (std::size_t s = 0; s < nb.size(); ++s) gi += problem.block_at(i, static_cast<int>(s)).apply(x[nb[s]]);
    g.blocks.push_back(std::move(gi));
  }
  return g;
}

double objective(const Problem& problem, const PrimalPoint& x) {
  double f = 0.0;
  for (int i = 0; i < problem.num_agents(); ++i) f += problem.cost(i).value(x[i]);
  return f;
}

double feasibility_violation(const Problem& problem, const PrimalPoint& x) {
  const DualPoint g = constraint_values(problem, x);
  double ineq = 0.0;
  double eq = 0.0;
  for (int i = 0; i < problem.num_agents(); ++i) {
    const int p = problem.ineq_rows(i);
    ineq += g[i].head(p).cwiseMax(0.0).squaredNorm();
    eq += g[i].tail(problem.eq_rows(i)).squaredNorm();
  }
  return std::sqrt(ineq) + std::sqrt(eq);
}

DualEvaluation dual_value_and_gradient(const Problem& problem, const DualPoint& y) {
  DualEvaluation out;
  out.primal = primal_response(problem, y);
  out.gradient = constraint_values(problem, out.primal);
  out.value = objective(problem, out.primal);
  for (int i = 0; i < problem.num_agents(); ++i) out.value += out.gradient[i].dot(y[i]);
  return out;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (std::min(m.rows(), m.cols()) <= 64) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
  }
  // Power iteration stalls on small spectral gaps; divide and conquer does not.
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double power_iteration_norm(const Matrix& m, double rel_tol, int max_iters) {
  if (m.size() == 0) return 0.0;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  const Matrix a = m / scale;
  const Eigen::Index n = a.cols();

  // Deterministic start; a few fallbacks in case it is orthogonal to the top
  // right singular vector.
  for (int attempt = 0; attempt < 4; ++attempt) {
    Vector v(n);
    for (Eigen::Index t = 0; t < n; ++t) {
      const double phase = 0.6180339887498949 * static_cast<double>((t + 1) * (attempt + 1));
      v[t] = 1.0 + (phase - std::floor(phase));
    }
    if (attempt > 0) v[attempt % n] += 10.0 * attempt;
    v.normalize();

    double sigma = 0.0;
    bool degenerate = false;
    for (int it = 0; it < max_iters; ++it) {
      const Vector av = a * v;
      const Vector w = a.transpose() * av;
      const double wn = w.norm();
      if (wn == 0.0) {
        degenerate = true;
        break;
      }
      const double next = std::sqrt(wn);
      v = w / wn;
      if (std::abs(next - sigma) <= rel_tol * next) {
        sigma = next;
        break;
      }
      sigma = next;
    }
    if (!degenerate) return sigma * scale;
  }
  return 0.0;
}

double coupling_lipschitz(const Problem& problem, AgentId i, AgentId j) {
  const CouplingBlock* b = problem.block(i, j);
  if (b == nullptr) return 0.0;
  return spectral_norm(b->stacked());
}

}  // namespace asyncdual
