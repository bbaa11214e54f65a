#include "asyncdual/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "asyncdual/errors.hpp"
#include "asyncdual/format.hpp"

namespace asyncdual {

ThetaPairs compute_theta_pairs(const Problem& problem) {
  ThetaPairs pairs;
  for (int i = 0; i < problem.num_agents(); ++i) {
    for (AgentId j : problem.neighbors(i)) pairs[{i, j}] = coupling_lipschitz(problem, i, j);
  }
  return pairs;
}

double theta_at(const Problem& problem, const ThetaPairs& pairs, AgentId i, AgentId j) {
  if (!problem.graph().adjacent(i, j)) return 0.0;
  auto it = pairs.find({i, j});
  if (it == pairs.end()) {
    throw Error("missing theta entry for edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
  }
  return it->second;
}

AgentConstants compute_agent_row(const Problem& problem, const ThetaPairs& pairs, AgentId i,
                                 PhiDenominator phi_denominator, std::vector<AgentId>* touched) {
  auto touch = [&](AgentId a) {
    if (touched != nullptr) touched->push_back(a);
  };
  auto theta = [&](AgentId a, AgentId b) {
    touch(a);
    touch(b);
    return theta_at(problem, pairs, a, b);
  };
  auto rho = [&](AgentId a) {
    touch(a);
    return problem.cost(a).rho();
  };
  auto neighbors = [&](AgentId a) -> const std::vector<AgentId>& {
    touch(a);
    return problem.neighbors(a);
  };
  // theta_j = sqrt(sum_{l in N_j} theta_{l,j}^2)
  auto theta_agent = [&](AgentId j) {
    double s = 0.0;
    for (AgentId l : neighbors(j)) {
      const double t = theta(l, j);
      s += t * t;
    }
    return std::sqrt(s);
  };

  AgentConstants c;
  c.theta = theta_agent(i);
  const double rho_i = rho(i);
  for (AgentId j : neighbors(i)) {
    const double theta_j = theta_agent(j);
    const double rho_j = rho(j);
    const double ratio_j = theta_j / rho_j;
    c.phi += theta_j * theta_j / (phi_denominator == PhiDenominator::Owner ? rho_i : rho_j);
    c.ell += theta(i, j) * ratio_j;
    double incoming = 0.0;
    for (AgentId l : neighbors(j)) incoming += theta(l, j);
    c.xi += incoming * ratio_j;
  }
  return c;
}

ConstantsTable compute_agent_constants(const Problem& problem, const ThetaPairs& pairs,
                                       PhiDenominator phi_denominator) {
  ConstantsTable table;
  table.theta_pairs = pairs;
  table.phi_denominator = phi_denominator;
  table.agents.reserve(problem.num_agents());
  for (int i = 0; i < problem.num_agents(); ++i) {
    table.agents.push_back(compute_agent_row(problem, pairs, i, phi_denominator));
  }
  return table;
}

double step_size_bound(const ConstantsTable& constants, AgentId i, int q) {
  if (q < 1) throw Error("asynchrony bound Q must be a positive integer, got " + std::to_string(q));
  const auto& c = constants.agents.at(i);
  const double denom = 0.5 * c.phi + 1.5 * static_cast<double>(q) * (c.ell + c.xi);
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / denom;
}

ConstantsTable choose_gammas(ConstantsTable constants, int q, double safety, double scale) {
  if (!(safety > 0.0 && safety <= 1.0)) throw Error("safety must lie in (0, 1]");
  if (!(scale > 0.0)) throw Error("gamma scale must be positive");
  const int n = constants.size();
  constants.q = q;
  constants.safety = safety;
  constants.scale = scale;
  constants.gamma_max.assign(n, 0.0);
  constants.gamma.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double bound = step_size_bound(constants, i, q);
    constants.gamma_max[i] = bound;
    constants.gamma[i] = std::isinf(bound) ? scale * safety : scale * safety * bound;
  }
  constants.admissible = scale * safety < 1.0;
  return constants;
}

double dual_lipschitz_bound(const Problem& problem, const ThetaPairs& pairs) {
  double best = 0.0;
  for (int i = 0; i < problem.num_agents(); ++i) {
    const auto own = compute_agent_row(problem, pairs, i, PhiDenominator::Owner);
    const auto nbr = compute_agent_row(problem, pairs, i, PhiDenominator::Neighbor);
    best = std::max({best, own.phi, nbr.phi});
  }
  return best;
}

double sync_step_size(const Problem& problem, const ThetaPairs& pairs, double safety) {
  const double l = dual_lipschitz_bound(problem, pairs);
  return l > 0.0 ? safety / l : safety;
}

void write_constants_csv(std::ostream& out, const ConstantsTable& constants) {
  out << "agent,theta_i,phi_i,ell_i,xi_i,gamma_max,gamma\n";
  for (int i = 0; i < constants.size(); ++i) {
    const auto& c = constants.agents[i];
    const double gmax = i < static_cast<int>(constants.gamma_max.size()) ? constants.gamma_max[i]
                                                                          : std::numeric_limits<double>::quiet_NaN();
    const double g =
        i < static_cast<int>(constants.gamma.size()) ? constants.gamma[i] : std::numeric_limits<double>::quiet_NaN();
    out << i << ',' << fmt_double(c.theta) << ',' << fmt_double(c.phi) << ',' << fmt_double(c.ell) << ','
        << fmt_double(c.xi) << ',' << fmt_double(gmax) << ',' << fmt_double(g) << '\n';
  }
}

}  // namespace asyncdual
