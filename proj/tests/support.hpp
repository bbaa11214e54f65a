#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "asyncdual/generators.hpp"
#include "asyncdual/problem.hpp"

namespace testsupport {

using namespace asyncdual;

/// min x^2/2 s.t. x = 1, one agent. Dual q(y) = -y^2/2 - y.
inline Problem scalar_equality() {
  Graph g = Graph::from_edges(1, {});
  std::vector<LocalCost> costs{LocalCost::diagonal(Vector::Ones(1), Vector::Zero(1))};
  std::vector<CouplingBlock> blocks{CouplingBlock(0, 0, Matrix(0, 1), Vector(0), Matrix::Ones(1, 1), Vector::Ones(1))};
  return Problem(g, costs, {ConstraintDims{0, 1}}, blocks);
}

/// min (x1^2 + x2^2)/2 s.t. x1 + x2 = 2, two agents, agent 0 owns the row.
inline Problem two_agent_sum() {
  Graph g = Graph::from_edges(2, {{0, 1}});
  std::vector<LocalCost> costs{LocalCost::diagonal(Vector::Ones(1), Vector::Zero(1)),
                               LocalCost::diagonal(Vector::Ones(1), Vector::Zero(1))};
  std::vector<CouplingBlock> blocks{
      CouplingBlock(0, 0, Matrix(0, 1), Vector(0), Matrix::Ones(1, 1), Vector::Constant(1, 2.0)),
      CouplingBlock(0, 1, Matrix(0, 1), Vector(0), Matrix::Ones(1, 1), Vector::Zero(1))};
  return Problem(g, costs, {ConstraintDims{0, 1}, ConstraintDims{0, 0}}, blocks);
}

inline Problem random_equality(std::uint64_t seed, int agents = 5) {
  return gen_random_instance(seed, equality_family(agents)).problem;
}

inline GeneratedInstance random_well_conditioned(std::uint64_t seed, int agents = 6) {
  return gen_random_instance(seed, well_conditioned_family(agents));
}

/// Random y in Omega.
inline DualPoint random_dual(const Problem& p, std::mt19937_64& rng, double spread = 1.0) {
  std::normal_distribution<double> normal(0.0, spread);
  DualPoint y;
  for (int i = 0; i < p.num_agents(); ++i) {
    Vector v(p.dual_dim(i));
    for (Eigen::Index t = 0; t < v.size(); ++t) v[t] = normal(rng);
    y.blocks.push_back(project_omega(p, i, v));
  }
  return y;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double spread = 1.0) {
  std::normal_distribution<double> normal(0.0, spread);
  Vector v(n);
  for (Eigen::Index t = 0; t < n; ++t) v[t] = normal(rng);
  return v;
}

}  // namespace testsupport
