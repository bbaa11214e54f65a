#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "asyncdual/problem.hpp"

namespace asyncdual {

/// theta_{i,j} keyed by (owner i, source j); one entry per edge including self-loops.
using ThetaPairs = std::map<std::pair<AgentId, AgentId>, double>;

/// Which strong-convexity modulus divides the neighbor terms of phi_i.
///   Owner:    phi_i = sum_{j in N_i} theta_j^2 / rho_i
///   Neighbor: phi_i = sum_{j in N_i} theta_j^2 / rho_j
enum class PhiDenominator { Owner, Neighbor };

struct AgentConstants {
  double theta = 0.0;
  double phi = 0.0;
  double ell = 0.0;
  double xi = 0.0;
};

struct ConstantsTable {
  std::vector<AgentConstants> agents;
  ThetaPairs theta_pairs;
  PhiDenominator phi_denominator = PhiDenominator::Owner;

  // Filled by choose_gammas().
  std::optional<int> q;
  std::vector<double> gamma_max;
  std::vector<double> gamma;
  double safety = 0.0;
  double scale = 0.0;
  /// scale * safety < 1: every gamma_i strictly satisfies the step-size bound.
  bool admissible = false;

  int size() const { return static_cast<int>(agents.size()); }
};

inline constexpr double kDefaultSafety = 0.99;

ThetaPairs compute_theta_pairs(const Problem& problem);

/// theta_{i,j} for the pair; 0 when j is not a neighbor of i. Throws if the
/// pair is an edge without an entry.
double theta_at(const Problem& problem, const ThetaPairs& pairs, AgentId i, AgentId j);

/// One agent's row. Reads data of N_i and of every N_j, j in N_i, only; each
/// agent whose data is read is appended to `touched` when given.
AgentConstants compute_agent_row(const Problem& problem, const ThetaPairs& pairs, AgentId i,
                                 PhiDenominator phi_denominator = PhiDenominator::Owner,
                                 std::vector<AgentId>* touched = nullptr);

ConstantsTable compute_agent_constants(const Problem& problem, const ThetaPairs& pairs,
                                       PhiDenominator phi_denominator = PhiDenominator::Owner);

/// 1 / (phi_i/2 + 3/2 Q (ell_i + xi_i)); +infinity for a decoupled agent.
double step_size_bound(const ConstantsTable& constants, AgentId i, int q);

/// gamma_i = scale * safety * bound_i(Q). A decoupled agent (infinite bound)
/// gets scale * safety.
ConstantsTable choose_gammas(ConstantsTable constants, int q, double safety = kDefaultSafety, double scale = 1.0);

/// Upper bound on the Lipschitz constant of grad q, valid for either phi
/// convention: max_i max(phi_i^owner, phi_i^neighbor).
double dual_lipschitz_bound(const Problem& problem, const ThetaPairs& pairs);

/// Common step for the synchronous iteration: safety / dual_lipschitz_bound().
double sync_step_size(const Problem& problem, const ThetaPairs& pairs, double safety = kDefaultSafety);

/// agent,theta_i,phi_i,ell_i,xi_i,gamma_max,gamma
void write_constants_csv(std::ostream& out, const ConstantsTable& constants);

}  // namespace asyncdual
