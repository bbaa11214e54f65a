#pragma once

#include <utility>
#include <vector>

#include "asyncdual/constants.hpp"
#include "asyncdual/problem.hpp"

namespace asyncdual {

/// What agent i last heard from neighbor j: y_j and g_{i,j}(x_j), both as of
/// counter `origin`.
struct MailboxEntry {
  Vector dual;
  Vector coupling;
  Counter origin = 0;
};

struct AgentState {
  Vector x;
  Vector y;
  /// mailbox[s] holds data of problem.neighbors(i)[s]; the agent's own slot included.
  std::vector<MailboxEntry> mailbox;
};

struct OutgoingMessage {
  AgentId to = 0;
  Vector dual;      // y_i after the update
  Vector coupling;  // g_{to,i}(x_i) after the update, evaluated by the sender
};

struct AgentUpdate {
  AgentState state;
  std::vector<OutgoingMessage> outbox;
};

/// y_i(0) = 0, x_i(0) = argmin f_i, every mailbox seeded with the exact initial data.
std::vector<AgentState> initial_states(const Problem& problem);

/// Mailbox entry that agent `to` keeps for `from` once it sees (x_from, y_from).
MailboxEntry make_entry(const Problem& problem, AgentId to, AgentId from, const Vector& x_from,
                        const Vector& y_from, Counter origin);

/// sum_{j in N_i} G_{j,i}' y_j over the stale duals in the mailbox.
Vector stale_dual_term(const Problem& problem, AgentId i, const AgentState& state);
/// sum_{j in N_i} g_{i,j}(x_j) over the stale couplings in the mailbox.
Vector stale_gradient(const Problem& problem, AgentId i, const AgentState& state);

/// One asynchronous update of agent i from a single snapshot of its mailbox:
///   x_i+ = argmin f_i(x) + <x, sum_j G_{j,i}' y_j(stale)>
///   y_i+ = proj_{Omega_i}(y_i + gamma_i sum_j g_{i,j}(x_j(stale)))
/// The mailbox is returned unchanged; the outbox carries (y_i+, g_{l,i}(x_i+))
/// for every neighbor l != i.
AgentUpdate async_agent_update(const Problem& problem, const ConstantsTable& constants, AgentId i,
                               AgentState state);

/// Inactive agents keep their iterates.
AgentState hold_step(const AgentState& state);

/// s_i = (proj(y_i + gamma_i * stale gradient) - y_i) / gamma_i when active, else 0.
Vector update_residual(const Problem& problem, const ConstantsTable& constants, AgentId i, const AgentState& state,
                       bool was_active);

/// One synchronous round with a common step: x+ = x*(y), then
/// y_i+ = proj(y_i + gamma sum_j g_{i,j}(x_j+)). The incoming x is not used;
/// it is part of the signature because the round replaces it.
std::pair<PrimalPoint, DualPoint> sync_iteration(const Problem& problem, double gamma, const PrimalPoint& x,
                                                 const DualPoint& y);

}  // namespace asyncdual
