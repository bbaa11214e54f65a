#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "asyncdual/constants.hpp"
#include "asyncdual/errors.hpp"
#include "asyncdual/generators.hpp"
#include "support.hpp"

using namespace asyncdual;
using namespace testsupport;

namespace {

Problem isolated(double theta, double rho) {
  Graph g = Graph::from_edges(1, {});
  std::vector<LocalCost> costs{LocalCost::diagonal(Vector::Constant(1, rho), Vector::Zero(1))};
  std::vector<CouplingBlock> blocks{
      CouplingBlock(0, 0, Matrix(0, 1), Vector(0), Matrix::Constant(1, 1, theta), Vector::Zero(1))};
  return Problem(g, costs, {ConstraintDims{0, 1}}, blocks);
}

// Every block is [1], every Hessian 1, on a path of three agents.
Problem unit_path() {
  const Graph g = path_graph(3);
  std::vector<LocalCost> costs(3, LocalCost::diagonal(Vector::Ones(1), Vector::Zero(1)));
  std::vector<CouplingBlock> blocks;
  for (int i = 0; i < 3; ++i) {
    for (AgentId j : g.neighbors(i)) blocks.emplace_back(i, j, Matrix(0, 1), Vector(0), Matrix::Ones(1, 1), Vector::Zero(1));
  }
  return Problem(g, costs, std::vector<ConstraintDims>(3, ConstraintDims{0, 1}), blocks);
}

// Straight summation over a dense theta matrix; no neighbor lists involved.
AgentConstants brute_force(const Problem& p, int i) {
  const int n = p.num_agents();
  Matrix th = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) th(a, b) = coupling_lipschitz(p, a, b);
  }
  auto edge = [&](int a, int b) { return p.graph().adjacent(a, b); };
  std::vector<double> theta(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int l = 0; l < n; ++l) {
      if (edge(j, l)) s += th(l, j) * th(l, j);
    }
    theta[j] = std::sqrt(s);
  }
  AgentConstants c;
  c.theta = theta[i];
  for (int j = 0; j < n; ++j) {
    if (!edge(i, j)) continue;
    const double rj = p.cost(j).rho();
    c.phi += theta[j] * theta[j] / p.cost(i).rho();
    c.ell += th(i, j) * theta[j] / rj;
    for (int l = 0; l < n; ++l) {
      if (edge(j, l)) c.xi += th(l, j) * theta[j] / rj;
    }
  }
  return c;
}

Problem rebuild_with_perturbed_agent(const Problem& p, AgentId k) {
  std::vector<LocalCost> costs = p.costs();
  const auto& c = p.cost(k);
  if (c.is_diagonal()) {
    costs[k] = LocalCost::diagonal(3.0 * c.hessian_diagonal(), c.linear() * 2.0, c.box(), c.offset());
  } else {
    costs[k] = LocalCost::dense(3.0 * c.hessian(), c.linear() * 2.0, c.offset());
  }
  std::vector<ConstraintDims> dims;
  std::vector<CouplingBlock> blocks;
  for (int i = 0; i < p.num_agents(); ++i) {
    dims.push_back(p.dims(i));
    const auto& nb = p.neighbors(i);
    for (std::size_t s = 0; s < nb.size(); ++s) {
      const auto& b = p.block_at(i, static_cast<int>(s));
      const double f = i == k ? 5.0 : 1.0;
      blocks.emplace_back(i, nb[s], f * b.ineq_matrix(), b.ineq_offset(), f * b.eq_matrix(), b.eq_offset());
    }
  }
  return Problem(p.graph(), costs, dims, blocks);
}

}  // namespace

TEST_SUITE("constants") {
  TEST_CASE("isolated agent") {
    const double theta = 2.0, rho = 0.5;
    const Problem p = isolated(theta, rho);
    const auto t = compute_agent_constants(p, compute_theta_pairs(p));
    const double r = theta * theta / rho;
    CHECK(t.agents[0].theta == doctest::Approx(theta));
    CHECK(t.agents[0].phi == doctest::Approx(r));
    CHECK(t.agents[0].ell == doctest::Approx(r));
    CHECK(t.agents[0].xi == doctest::Approx(r));
    CHECK(step_size_bound(t, 0, 1) == doctest::Approx(rho / (3.5 * theta * theta)));
  }

  TEST_CASE("no coupling gives zero constants and an infinite bound") {
    const Graph g = path_graph(3);
    std::vector<LocalCost> costs(3, LocalCost::diagonal(Vector::Ones(1), Vector::Zero(1)));
    const Problem p(g, costs, std::vector<ConstraintDims>(3), {});
    const auto t = compute_agent_constants(p, compute_theta_pairs(p));
    for (const auto& a : t.agents) {
      CHECK(a.theta == 0.0);
      CHECK(a.phi == 0.0);
      CHECK(a.ell == 0.0);
      CHECK(a.xi == 0.0);
    }
    CHECK(std::isinf(step_size_bound(t, 1, 5)));
    const auto chosen = choose_gammas(t, 5);
    CHECK(chosen.gamma[1] == doctest::Approx(kDefaultSafety));
  }

  TEST_CASE("unit path matches direct summation") {
    const Problem p = unit_path();
    const auto t = compute_agent_constants(p, compute_theta_pairs(p));
    for (int i = 0; i < 3; ++i) {
      const auto want = brute_force(p, i);
      CHECK(t.agents[i].theta == doctest::Approx(want.theta));
      CHECK(t.agents[i].phi == doctest::Approx(want.phi));
      CHECK(t.agents[i].ell == doctest::Approx(want.ell));
      CHECK(t.agents[i].xi == doctest::Approx(want.xi));
    }
    // Hand values: theta = (sqrt2, sqrt3, sqrt2).
    CHECK(t.agents[0].phi == doctest::Approx(5.0));
    CHECK(t.agents[1].phi == doctest::Approx(7.0));
    CHECK(t.agents[0].ell == doctest::Approx(std::sqrt(2.0) + std::sqrt(3.0)));
    CHECK(t.agents[0].xi == doctest::Approx(2.0 * std::sqrt(2.0) + 3.0 * std::sqrt(3.0)));
  }

  TEST_CASE("random instances match direct summation") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const auto inst = random_well_conditioned(seed, 7);
      const Problem& p = inst.problem;
      const auto t = compute_agent_constants(p, compute_theta_pairs(p));
      for (int i = 0; i < p.num_agents(); ++i) {
        const auto want = brute_force(p, i);
        CHECK(t.agents[i].theta == doctest::Approx(want.theta).epsilon(1e-12));
        CHECK(t.agents[i].phi == doctest::Approx(want.phi).epsilon(1e-12));
        CHECK(t.agents[i].ell == doctest::Approx(want.ell).epsilon(1e-12));
        CHECK(t.agents[i].xi == doctest::Approx(want.xi).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("neighbor phi uses rho_j") {
    const auto inst = random_well_conditioned(3, 5);
    const Problem& p = inst.problem;
    const auto pairs = compute_theta_pairs(p);
    const auto own = compute_agent_constants(p, pairs, PhiDenominator::Owner);
    const auto nbr = compute_agent_constants(p, pairs, PhiDenominator::Neighbor);
    for (int i = 0; i < p.num_agents(); ++i) {
      double want = 0.0;
      for (AgentId j : p.neighbors(i)) want += own.agents[j].theta * own.agents[j].theta / p.cost(j).rho();
      CHECK(nbr.agents[i].phi == doctest::Approx(want));
      CHECK(nbr.agents[i].ell == own.agents[i].ell);
      CHECK(nbr.agents[i].xi == own.agents[i].xi);
      CHECK(dual_lipschitz_bound(p, pairs) >= std::max(own.agents[i].phi, nbr.agents[i].phi));
    }
  }

  TEST_CASE("missing theta entry is an error") {
    const Problem p = unit_path();
    auto pairs = compute_theta_pairs(p);
    pairs.erase({1, 2});
    CHECK_THROWS_WITH_AS(compute_agent_constants(p, pairs), "missing theta entry for edge (1,2)", Error);
  }

  TEST_CASE("bound examples") {
    const Problem p = isolated(1.0, 1.0);
    const auto t = compute_agent_constants(p, compute_theta_pairs(p));
    const auto& c = t.agents[0];
    const double ratio = step_size_bound(t, 0, 100) / step_size_bound(t, 0, 1);
    CHECK(ratio == doctest::Approx((0.5 * c.phi + 1.5 * (c.ell + c.xi)) / (0.5 * c.phi + 150.0 * (c.ell + c.xi))));
    CHECK_THROWS_AS(step_size_bound(t, 0, 0), Error);
  }

  TEST_CASE("choose_gammas admissibility flag") {
    const Problem p = unit_path();
    const auto t = compute_agent_constants(p, compute_theta_pairs(p));
    const auto ok = choose_gammas(t, 3, 0.99, 1.0);
    CHECK(ok.admissible);
    for (int i = 0; i < 3; ++i) {
      CHECK(ok.gamma[i] < ok.gamma_max[i]);
      CHECK(ok.gamma[i] > 0.0);
      CHECK(ok.gamma[i] == doctest::Approx(0.99 * step_size_bound(t, i, 3)));
    }
    CHECK_FALSE(choose_gammas(t, 3, 0.99, 100.0).admissible);
    CHECK_FALSE(choose_gammas(t, 3, 1.0, 1.0).admissible);
    CHECK(choose_gammas(t, 3, 0.99, 100.0).gamma[0] == doctest::Approx(99.0 * step_size_bound(t, 0, 3)));
    CHECK_THROWS_AS(choose_gammas(t, 3, 0.0, 1.0), Error);
    CHECK_THROWS_AS(choose_gammas(t, 3, 0.5, -1.0), Error);
  }

  TEST_CASE("bound and gamma strictly decrease in Q") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto inst = random_well_conditioned(seed);
      const auto t = compute_agent_constants(inst.problem, compute_theta_pairs(inst.problem));
      for (int i = 0; i < t.size(); ++i) {
        if (t.agents[i].ell + t.agents[i].xi == 0.0) continue;
        double prev_bound = std::numeric_limits<double>::infinity();
        double prev_gamma = std::numeric_limits<double>::infinity();
        for (int q = 1; q <= 200; ++q) {
          const double b = step_size_bound(t, i, q);
          const double g = choose_gammas(t, q).gamma[i];
          CHECK(b < prev_bound);
          CHECK(g < prev_gamma);
          prev_bound = b;
          prev_gamma = g;
        }
      }
    }
  }

  TEST_CASE("agent rows only read the two-hop neighborhood") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const auto inst = gen_random_instance(seed, [] {
        auto o = well_conditioned_family(10);
        o.extra_edges = 2;
        return o;
      }());
      const Problem& p = inst.problem;
      const auto pairs = compute_theta_pairs(p);
      for (int i = 0; i < p.num_agents(); ++i) {
        std::vector<AgentId> touched;
        compute_agent_row(p, pairs, i, PhiDenominator::Owner, &touched);
        const auto hood = p.graph().two_hop(i);
        for (AgentId a : touched) CHECK(std::binary_search(hood.begin(), hood.end(), a));
      }
    }
  }

  TEST_CASE("gamma_i ignores data beyond two hops") {
    auto opts = well_conditioned_family(9);
    opts.extra_edges = 0;
    int compared = 0;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const Problem p = gen_random_instance(seed, opts).problem;
      const auto base = choose_gammas(compute_agent_constants(p, compute_theta_pairs(p)), 7);
      for (AgentId k = 0; k < p.num_agents(); ++k) {
        const Problem q = rebuild_with_perturbed_agent(p, k);
        const auto moved = choose_gammas(compute_agent_constants(q, compute_theta_pairs(q)), 7);
        for (int i = 0; i < p.num_agents(); ++i) {
          const auto hood = p.graph().two_hop(i);
          if (std::binary_search(hood.begin(), hood.end(), k)) continue;
          CHECK(std::memcmp(&base.gamma[i], &moved.gamma[i], sizeof(double)) == 0);
          ++compared;
        }
      }
    }
    CHECK(compared > 0);
  }

  TEST_CASE("constants CSV") {
    const Problem p = isolated(2.0, 0.5);
    const auto t = choose_gammas(compute_agent_constants(p, compute_theta_pairs(p)), 1);
    std::ostringstream out;
    write_constants_csv(out, t);
    const std::string s = out.str();
    CHECK(s.rfind("agent,theta_i,phi_i,ell_i,xi_i,gamma_max,gamma\n", 0) == 0);
    CHECK(s.find("\n0,2,8,8,8,") != std::string::npos);
  }
}
