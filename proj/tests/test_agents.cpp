#include <doctest.h>

#include <random>

#include "asyncdual/agents.hpp"
#include "asyncdual/engine.hpp"
#include "asyncdual/errors.hpp"
#include "asyncdual/experiment.hpp"
#include "asyncdual/oracle.hpp"
#include "support.hpp"

using namespace asyncdual;
using namespace testsupport;

namespace {

// One agent, one scalar coupling row: inequality when `ineq`, else equality.
Problem scalar_row(bool ineq) {
  Graph g = Graph::from_edges(1, {});
  std::vector<LocalCost> costs{LocalCost::diagonal(Vector::Ones(1), Vector::Constant(1, -1.0))};
  const Matrix one = Matrix::Ones(1, 1);
  const Matrix none(0, 1);
  std::vector<CouplingBlock> blocks{ineq ? CouplingBlock(0, 0, one, Vector::Zero(1), none, Vector(0))
                                         : CouplingBlock(0, 0, none, Vector(0), one, Vector::Zero(1))};
  return Problem(g, costs, {ineq ? ConstraintDims{1, 0} : ConstraintDims{0, 1}}, blocks);
}

ConstantsTable with_gamma(std::vector<double> gamma) {
  ConstantsTable t;
  t.agents.resize(gamma.size());
  t.gamma = std::move(gamma);
  return t;
}

AgentState scalar_state(double y, double stale_sum) {
  AgentState s;
  s.x = Vector::Zero(1);
  s.y = Vector::Constant(1, y);
  s.mailbox.push_back(MailboxEntry{Vector::Constant(1, y), Vector::Constant(1, stale_sum), 0});
  return s;
}

// Mailboxes filled with the current values of every agent.
std::vector<AgentState> fresh_states(const Problem& p, const PrimalPoint& x, const DualPoint& y) {
  std::vector<AgentState> states(p.num_agents());
  for (int i = 0; i < p.num_agents(); ++i) {
    states[i].x = x[i];
    states[i].y = y[i];
    for (AgentId j : p.neighbors(i)) states[i].mailbox.push_back(make_entry(p, i, j, x[j], y[j], 0));
  }
  return states;
}

}  // namespace

TEST_SUITE("agents") {
  TEST_CASE("decoupled agent with a current mailbox") {
    Graph g = Graph::from_edges(2, {{0, 1}});
    std::vector<LocalCost> costs{LocalCost::diagonal(Vector::Constant(1, 2.0), Vector::Constant(1, -4.0)),
                                 LocalCost::diagonal(Vector::Ones(1), Vector::Zero(1))};
    const Problem p(g, costs, {ConstraintDims{0, 1}, ConstraintDims{0, 0}}, {});
    auto states = initial_states(p);
    states[0].y = Vector::Constant(1, 3.0);
    const auto out = async_agent_update(p, with_gamma({0.7, 0.7}), 0, states[0]);
    CHECK(out.state.x[0] == doctest::Approx(2.0));
    CHECK(out.state.y[0] == 3.0);
    REQUIRE(out.outbox.size() == 1);
    CHECK(out.outbox[0].to == 1);
  }

  TEST_CASE("scalar projected steps") {
    const Problem ineq = scalar_row(true);
    const Problem eq = scalar_row(false);
    CHECK(async_agent_update(ineq, with_gamma({1.0}), 0, scalar_state(0.0, -2.0)).state.y[0] == 0.0);
    CHECK(async_agent_update(eq, with_gamma({0.5}), 0, scalar_state(0.0, 4.0)).state.y[0] == 2.0);
    CHECK(async_agent_update(ineq, with_gamma({0.5}), 0, scalar_state(1.0, -1.0)).state.y[0] == 0.5);
  }

  TEST_CASE("missing mailbox entries are an error") {
    const Problem p = random_equality(0);
    auto s = initial_states(p);
    s[1].mailbox.pop_back();
    const auto t = choose_gammas(compute_agent_constants(p, compute_theta_pairs(p)), 1);
    CHECK_THROWS_AS(async_agent_update(p, t, 1, s[1]), Error);
  }

  TEST_CASE("hold keeps the iterates") {
    const Problem p = random_equality(3);
    auto s = initial_states(p)[2];
    s.y = Vector::Constant(p.dual_dim(2), 1.5);
    const AgentState once = hold_step(s);
    const AgentState twice = hold_step(once);
    CHECK(once.x == s.x);
    CHECK(once.y == s.y);
    CHECK(twice.x == s.x);
    CHECK(twice.y == s.y);
    AgentState delivered = hold_step(s);
    delivered.mailbox[0] = MailboxEntry{Vector::Ones(delivered.mailbox[0].dual.size()),
                                        Vector::Ones(delivered.mailbox[0].coupling.size()), 7};
    const AgentState after = hold_step(delivered);
    CHECK(after.x == s.x);
    CHECK(after.y == s.y);
    CHECK(after.mailbox[0].origin == 7);
  }

  TEST_CASE("update residual") {
    const Problem ineq = scalar_row(true);
    const Problem eq = scalar_row(false);
    const auto t1 = with_gamma({1.0});
    CHECK(update_residual(ineq, t1, 0, scalar_state(0.0, -2.0), true)[0] == 0.0);
    CHECK(update_residual(eq, t1, 0, scalar_state(0.3, 0.0), true)[0] == 0.0);
    CHECK(update_residual(eq, t1, 0, scalar_state(0.3, 5.0), false)[0] == 0.0);
    CHECK(update_residual(eq, with_gamma({0.25}), 0, scalar_state(0.0, 4.0), true)[0] == doctest::Approx(4.0));
    CHECK_THROWS_AS(update_residual(eq, with_gamma({0.0}), 0, scalar_state(0.0, 1.0), true), Error);
  }

  TEST_CASE("fresh mailbox gives the dual gradient") {
    std::mt19937_64 rng(17);
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const auto inst = random_well_conditioned(seed);
      const Problem& p = inst.problem;
      for (int trial = 0; trial < 10; ++trial) {
        const DualPoint y = random_dual(p, rng, 2.0);
        const auto states = fresh_states(p, primal_response(p, y), y);
        const auto ev = dual_value_and_gradient(p, y);
        for (int i = 0; i < p.num_agents(); ++i) {
          CHECK((stale_gradient(p, i, states[i]) - ev.gradient[i]).norm() <= 1e-10);
        }
      }
    }
  }

  TEST_CASE("fresh async update differs from the synchronous round") {
    std::mt19937_64 rng(3);
    const Problem p = random_equality(5);
    // x(k) = x*(y(k-1)), so the fresh mailbox still carries g(x(k)), not g(x(k+1)).
    const DualPoint prev = random_dual(p, rng);
    const DualPoint y = random_dual(p, rng);
    const PrimalPoint x = primal_response(p, prev);
    const double gamma = 0.1;
    const auto states = fresh_states(p, x, y);
    const auto [sx, sy] = sync_iteration(p, gamma, x, y);
    const auto table = with_gamma(std::vector<double>(p.num_agents(), gamma));
    double diff = 0.0;
    for (int i = 0; i < p.num_agents(); ++i) {
      const auto u = async_agent_update(p, table, i, states[i]);
      CHECK((u.state.x - sx[i]).norm() <= 1e-12);
      diff = std::max(diff, (u.state.y - sy[i]).norm());
    }
    CHECK(diff > 1e-6);
  }

  TEST_CASE("distributed round equals the centralized step") {
    std::mt19937_64 rng(99);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto inst = random_well_conditioned(seed);
      const Problem& p = inst.problem;
      const GlobalForm form = assemble_global(p);
      const double gamma = sync_step_size(p, compute_theta_pairs(p));
      DualPoint y = random_dual(p, rng);
      Vector yc = y.stacked();
      PrimalPoint x = primal_response(p, y);
      for (int step = 0; step < 200; ++step) {
        auto [nx, ny] = sync_iteration(p, gamma, x, y);
        const Vector want = centralized_dual_step(form, yc, gamma);
        CHECK((ny.stacked() - want).lpNorm<Eigen::Infinity>() <= 1e-12);
        CHECK((nx.stacked() - centralized_argmin(form, yc)).lpNorm<Eigen::Infinity>() <= 1e-12);
        x = std::move(nx);
        y = std::move(ny);
        yc = y.stacked();
      }
    }
  }

  TEST_CASE("synchronous round fixed point and tiny step") {
    const Problem p = random_equality(7);
    const auto ref = kkt_solve(p);
    const PrimalPoint xs = PrimalPoint::split(ref.x_star, p.primal_dims());
    const auto [nx, ny] = sync_iteration(p, 0.5, xs, ref.y_star);
    CHECK((ny.stacked() - ref.y_star.stacked()).norm() <= 1e-9);
    CHECK((nx.stacked() - ref.x_star).norm() <= 1e-9);

    std::mt19937_64 rng(1);
    const DualPoint y = random_dual(p, rng);
    const auto [tx, ty] = sync_iteration(p, 1e-14, xs, y);
    CHECK((ty.stacked() - y.stacked()).norm() <= 1e-12);
    CHECK((tx.stacked() - primal_response(p, y).stacked()).norm() <= 1e-12);
    CHECK_THROWS_AS(sync_iteration(p, 0.0, xs, y), Error);
  }

  TEST_CASE("async run keeps duals feasible, satisfies the residual inequality and never drops below q(y(0))") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto inst = random_well_conditioned(seed);
      const Problem& p = inst.problem;
      Timeline t(preset_for_q(p.graph(), 12, seed, 4000));
      const Trace dry = dry_run(t, 4000);
      const auto table = choose_gammas(compute_agent_constants(p, compute_theta_pairs(p)), dry.realized_q);
      RunOptions o;
      o.horizon = 4000;
      o.record_every = 1;
      std::size_t active = 0, violations = 0;
      o.observer = [&](const UpdateObservation& ob) {
        ++active;
        if (ob.residual.dot(ob.stale_gradient) < ob.residual.squaredNorm() - 1e-10) ++violations;
      };
      const auto r = run_async(p, table, t, o);
      CHECK(active > 0);
      CHECK(violations == 0);
      for (const auto& row : r.record.rows) CHECK(row.dual >= r.record.initial_dual - 1e-8);
      for (int i = 0; i < p.num_agents(); ++i) {
        const Vector& y = r.final_states[i].y;
        for (int a = 0; a < p.ineq_rows(i); ++a) CHECK(y[a] >= 0.0);
      }
    }
  }
}
