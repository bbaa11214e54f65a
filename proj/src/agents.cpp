#include "asyncdual/agents.hpp"

#include <string>

#include "asyncdual/errors.hpp"

namespace asyncdual {

namespace {

void require_mailbox(const Problem& problem, AgentId i, const AgentState& state) {
  if (state.mailbox.size() != problem.neighbors(i).size()) {
    throw Error("agent " + std::to_string(i) + " is missing mailbox entries (" +
                std::to_string(state.mailbox.size()) + " of " + std::to_string(problem.neighbors(i).size()) + ")");
  }
}

double gamma_of(const ConstantsTable& constants, AgentId i) {
  if (static_cast<int>(constants.gamma.size()) <= i) throw Error("step sizes are not set");
  return constants.gamma[i];
}

}  // namespace

MailboxEntry make_entry(const Problem& problem, AgentId to, AgentId from, const Vector& x_from,
                        const Vector& y_from, Counter origin) {
  return MailboxEntry{y_from, eval_coupling(problem, to, from, x_from), origin};
}

std::vector<AgentState> initial_states(const Problem& problem) {
  const int n = problem.num_agents();
  std::vector<AgentState> states(n);
  for (int i = 0; i < n; ++i) {
    states[i].y = Vector::Zero(problem.dual_dim(i));
    states[i].x = local_argmin(problem, i, Vector::Zero(problem.primal_dim(i)));
  }
  for (int i = 0; i < n; ++i) {
    for (AgentId j : problem.neighbors(i)) {
      states[i].mailbox.push_back(make_entry(problem, i, j, states[j].x, states[j].y, 0));
    }
  }
  return states;
}

Vector stale_dual_term(const Problem& problem, AgentId i, const AgentState& state) {
  require_mailbox(problem, i, state);
  std::vector<Vector> duals;
  duals.reserve(state.mailbox.size());
  for (const auto& e : state.mailbox) duals.push_back(e.dual);
  return aggregate_dual_term(problem, i, duals);
}

Vector stale_gradient(const Problem& problem, AgentId i, const AgentState& state) {
  require_mailbox(problem, i, state);
  Vector g = Vector::Zero(problem.dual_dim(i));
  for (const auto& e : state.mailbox) g += e.coupling;
  return g;
}

AgentUpdate async_agent_update(const Problem& problem, const ConstantsTable& constants, AgentId i,
                               AgentState state) {
  const double gamma = gamma_of(constants, i);
  // Both sums come from the same snapshot.
  const Vector lambda = stale_dual_term(problem, i, state);
  const Vector grad = stale_gradient(problem, i, state);

  AgentUpdate out;
  out.state.x = local_argmin(problem, i, lambda);
  out.state.y = project_omega(problem, i, state.y + gamma * grad);
  out.state.mailbox = std::move(state.mailbox);

  for (AgentId l : problem.neighbors(i)) {
    if (l == i) continue;
    out.outbox.push_back(OutgoingMessage{l, out.state.y, eval_coupling(problem, l, i, out.state.x)});
  }
  return out;
}

AgentState hold_step(const AgentState& state) { return state; }

Vector update_residual(const Problem& problem, const ConstantsTable& constants, AgentId i, const AgentState& state,
                       bool was_active) {
  const double gamma = gamma_of(constants, i);
  if (gamma == 0.0) throw Error("step size of agent " + std::to_string(i) + " is zero");
  if (!was_active) return Vector::Zero(problem.dual_dim(i));
  const Vector grad = stale_gradient(problem, i, state);
  return (project_omega(problem, i, state.y + gamma * grad) - state.y) / gamma;
}

std::pair<PrimalPoint, DualPoint> sync_iteration(const Problem& problem, double gamma, const PrimalPoint& /*x*/,
                                                 const DualPoint& y) {
  if (!(gamma > 0.0)) throw Error("synchronous step must be positive");
  // First exchange: duals y_j(k) -> primal minimizers.
  PrimalPoint next_x = primal_response(problem, y);
  // Second exchange: fresh g_{i,j}(x_j(k+1)) -> dual step.
  const DualPoint g = constraint_values(problem, next_x);
  DualPoint next_y;
  next_y.blocks.reserve(y.size());
  for (int i = 0; i < problem.num_agents(); ++i) {
    next_y.blocks.push_back(project_omega(problem, i, y[i] + gamma * g[i]));
  }
  return {std::move(next_x), std::move(next_y)};
}

}  // namespace asyncdual
