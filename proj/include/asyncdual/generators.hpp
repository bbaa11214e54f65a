#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asyncdual/problem.hpp"

namespace asyncdual {

/// f_i(x) = w_i/2 (x - z_i)^2 with the constraint L_{-1} x = 0, where L_{-1}
/// is the graph Laplacian without its first row. Row i goes to agent i, so
/// agent 0 owns no constraint. Throws on a disconnected graph.
Problem gen_consensus_instance(const std::vector<double>& local_minimizers, const std::vector<double>& weights,
                               const Graph& graph);

struct Line {
  AgentId from = 0;
  AgentId to = 0;
  double susceptance = 0.0;
};

/// Per-unit DC power-flow data. Bus i holds x_i = (P_i, psi_i) with
///   cost  c_i/2 P_i^2 + q_i P_i + epsilon/2 psi_i^2,  0 <= P_i <= cap_i,
///   and the balance  P_i - P_i^d = sum_j B_ij (psi_i - psi_j).
struct DcOpfData {
  std::string name;
  int buses = 0;
  std::vector<Line> lines;
  std::vector<double> demand;
  std::vector<double> cap;
  std::vector<double> cost_quadratic;
  std::vector<double> cost_linear;
  double epsilon = 1e-3;
};

/// Throws on a disconnected network, a non-positive epsilon, or a demand
/// total outside [0, sum of caps].
Problem gen_dc_opf_instance(const DcOpfData& data);

/// Strictly feasible point: P proportional to the caps, angles from the
/// reduced Laplacian. Empty when total demand is not strictly inside (0, sum caps).
std::optional<Vector> dc_opf_slater_point(const DcOpfData& data);

/// Adjustments applied on top of the public 14-bus case data.
struct Ieee14Options {
  /// psi is expressed in units of 1/phase_scale rad, so susceptances shrink by phase_scale.
  double phase_scale = 1.0;
  /// Costs are divided by this (the minimizer does not change).
  double cost_unit = 1.0;
  double epsilon = 1e-3;
  /// Buses without a generator get a small unit so that the box has an interior.
  double load_bus_cap = 0.05;
  /// Cost of those units, in the same $/h per p.u. as the generators before cost_unit.
  double load_bus_quadratic = 200.0;
  double load_bus_linear = 4000.0;
};

/// IEEE 14-bus case: topology, branch reactances (B = 1/x), bus loads and
/// generator caps/costs on a 100 MVA base. Buses are 0-based.
DcOpfData ieee14_case(const Ieee14Options& options = {});

/// Options of the bundled instance data/ieee14.json.
Ieee14Options ieee14_bundled_options();
/// Provenance note stored in the instance metadata.
std::string ieee14_description(const Ieee14Options& options);

struct RandomInstanceOptions {
  int agents = 5;
  int min_primal = 1;
  int max_primal = 3;
  /// Equality rows per agent are drawn in [0, max_eq] (never more than n_i).
  int max_eq = 1;
  int max_ineq = 0;
  /// Diagonal Hessians with a box around the Slater point on some agents.
  bool boxes = false;
  /// Extra edges on top of a random spanning tree.
  int extra_edges = 1;
  /// Strength of the off-diagonal coupling blocks relative to the own block.
  double neighbor_weight = 1.0;
  /// Hessian eigenvalues are drawn in [curvature_min, curvature_max].
  double curvature_min = 0.5;
  double curvature_max = 2.0;
};

struct GeneratedInstance {
  Problem problem;
  std::optional<Vector> slater;
};

/// Seeded random instance. Equality offsets are set from a random point x_bar
/// and inequality offsets leave a positive margin at x_bar, so x_bar is
/// strictly feasible and returned as the Slater candidate.
GeneratedInstance gen_random_instance(std::uint64_t seed, const RandomInstanceOptions& options = {});

/// Equality-only, no boxes, dense Hessians: the KKT-solvable family.
RandomInstanceOptions equality_family(int agents = 5);
/// Sparse, own-block dominant couplings with a few inequality rows and boxes.
RandomInstanceOptions well_conditioned_family(int agents = 6);

Graph random_connected_graph(int n, int extra_edges, std::uint64_t seed);

}  // namespace asyncdual
