#include "asyncdual/generators.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "asyncdual/errors.hpp"
#include "asyncdual/format.hpp"

namespace asyncdual {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::pair<AgentId, AgentId>> line_pairs(const DcOpfData& d) {
  std::vector<std::pair<AgentId, AgentId>> out;
  for (const auto& l : d.lines) out.emplace_back(l.from, l.to);
  return out;
}

// Symmetric susceptance sums; parallel lines add up.
std::map<std::pair<AgentId, AgentId>, double> susceptances(const DcOpfData& d) {
  std::map<std::pair<AgentId, AgentId>, double> b;
  for (const auto& l : d.lines) {
    b[{l.from, l.to}] += l.susceptance;
    b[{l.to, l.from}] += l.susceptance;
  }
  return b;
}

void check_dc_opf(const DcOpfData& d) {
  const auto n = static_cast<std::size_t>(d.buses);
  if (d.buses < 1) throw DimensionError("DC-OPF instance needs at least one bus");
  if (d.demand.size() != n || d.cap.size() != n || d.cost_quadratic.size() != n || d.cost_linear.size() != n) {
    throw DimensionError("DC-OPF bus data must have one entry per bus");
  }
  if (!(d.epsilon > 0.0)) throw Error("phase regularization epsilon must be positive");
  for (const auto& l : d.lines) {
    if (l.from < 0 || l.to < 0 || l.from >= d.buses || l.to >= d.buses || l.from == l.to) {
      throw DimensionError("line (" + std::to_string(l.from) + "," + std::to_string(l.to) + ") is not a bus pair");
    }
    if (!(l.susceptance > 0.0)) throw Error("line susceptances must be positive");
  }
  for (int i = 0; i < d.buses; ++i) {
    if (!(d.cap[i] > 0.0)) throw Error("bus " + std::to_string(i) + " needs a positive generation cap");
    if (!(d.cost_quadratic[i] > 0.0)) throw Error("bus " + std::to_string(i) + " needs a positive quadratic cost");
  }
  if (!Graph::from_edges(d.buses, line_pairs(d)).is_connected()) throw Error("DC-OPF network is disconnected");
  const double total_demand = std::accumulate(d.demand.begin(), d.demand.end(), 0.0);
  const double total_cap = std::accumulate(d.cap.begin(), d.cap.end(), 0.0);
  if (total_demand < 0.0 || total_demand > total_cap) {
    throw Error("infeasible demand profile: total demand " + std::to_string(total_demand) + " outside [0, " +
                std::to_string(total_cap) + "]");
  }
}

Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = normal(rng);
  }
  return m;
}

Vector random_vector(std::mt19937_64& rng, int n) { return random_matrix(rng, n, 1).col(0); }

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace

Graph random_connected_graph(int n, int extra_edges, std::uint64_t seed) {
  if (n < 1) throw DimensionError("graph needs at least one agent");
  std::mt19937_64 rng(seed);
  std::vector<AgentId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::set<std::pair<AgentId, AgentId>> edges;
  for (int t = 1; t < n; ++t) {
    const AgentId a = order[t];
    const AgentId b = order[uniform_int(rng, 0, t - 1)];
    edges.insert({std::min(a, b), std::max(a, b)});
  }
  const auto max_edges = static_cast<std::size_t>(n) * (n - 1) / 2;
  for (int e = 0; e < extra_edges && edges.size() < max_edges;) {
    const AgentId a = uniform_int(rng, 0, n - 1);
    const AgentId b = uniform_int(rng, 0, n - 1);
    if (a == b) continue;
    if (edges.insert({std::min(a, b), std::max(a, b)}).second) ++e;
  }
  return Graph::from_edges(n, {edges.begin(), edges.end()});
}

Problem gen_consensus_instance(const std::vector<double>& local_minimizers, const std::vector<double>& weights,
                               const Graph& graph) {
  const int n = graph.size();
  if (static_cast<int>(local_minimizers.size()) != n || static_cast<int>(weights.size()) != n) {
    throw DimensionError("consensus instance needs one minimizer and one weight per agent");
  }
  if (!graph.is_connected()) throw Error("consensus instance needs a connected graph");
  std::vector<LocalCost> costs;
  std::vector<ConstraintDims> dims;
  std::vector<CouplingBlock> blocks;
  for (int i = 0; i < n; ++i) {
    const double w = weights[i];
    const double z = local_minimizers[i];
    if (!(w > 0.0)) throw Error("consensus weights must be positive");
    costs.push_back(LocalCost::diagonal(Vector::Constant(1, w), Vector::Constant(1, -w * z), std::nullopt,
                                        0.5 * w * z * z));
    dims.push_back(ConstraintDims{0, i == 0 ? 0 : 1});
  }
  for (int i = 1; i < n; ++i) {
    const auto& nb = graph.neighbors(i);
    const double degree = static_cast<double>(std::count_if(nb.begin(), nb.end(), [&](AgentId j) { return j != i; }));
    for (AgentId j : nb) {
      const double entry = j == i ? degree : -1.0;
      blocks.emplace_back(i, j, Matrix(0, 1), Vector(0), Matrix::Constant(1, 1, entry), Vector::Zero(1));
    }
  }
  return Problem(graph, std::move(costs), std::move(dims), std::move(blocks));
}

Problem gen_dc_opf_instance(const DcOpfData& d) {
  check_dc_opf(d);
  const Graph graph = Graph::from_edges(d.buses, line_pairs(d));
  const auto b = susceptances(d);
  std::vector<LocalCost> costs;
  std::vector<ConstraintDims> dims;
  std::vector<CouplingBlock> blocks;
  for (int i = 0; i < d.buses; ++i) {
    Vector h(2), q(2), lo(2), hi(2);
    h << d.cost_quadratic[i], d.epsilon;
    q << d.cost_linear[i], 0.0;
    lo << 0.0, -kInf;
    hi << d.cap[i], kInf;
    costs.push_back(LocalCost::diagonal(h, q, Box{lo, hi}));
    dims.push_back(ConstraintDims{0, 1});

    double own = 0.0;
    for (AgentId j : graph.neighbors(i)) {
      if (j != i) own += b.at({i, j});
    }
    for (AgentId j : graph.neighbors(i)) {
      Matrix a(1, 2);
      Vector rhs = Vector::Zero(1);
      if (j == i) {
        a << 1.0, -own;
        rhs[0] = d.demand[i];
      } else {
        a << 0.0, b.at({i, j});
      }
      blocks.emplace_back(i, j, Matrix(0, 2), Vector(0), a, rhs);
    }
  }
  return Problem(graph, std::move(costs), std::move(dims), std::move(blocks));
}

std::optional<Vector> dc_opf_slater_point(const DcOpfData& d) {
  check_dc_opf(d);
  const double total_demand = std::accumulate(d.demand.begin(), d.demand.end(), 0.0);
  const double total_cap = std::accumulate(d.cap.begin(), d.cap.end(), 0.0);
  if (!(total_demand > 0.0 && total_demand < total_cap)) return std::nullopt;
  const int n = d.buses;
  Vector p(n), injection(n);
  for (int i = 0; i < n; ++i) {
    p[i] = d.cap[i] * total_demand / total_cap;
    injection[i] = p[i] - d.demand[i];
  }
  Vector psi = Vector::Zero(n);
  if (n > 1) {
    Matrix lap = Matrix::Zero(n, n);
    for (const auto& [key, value] : susceptances(d)) {
      lap(key.first, key.second) -= value;
      lap(key.first, key.first) += value;
    }
    // Bus 0 is the angle reference.
    psi.tail(n - 1) = lap.bottomRightCorner(n - 1, n - 1).llt().solve(injection.tail(n - 1));
  }
  Vector x(2 * n);
  for (int i = 0; i < n; ++i) {
    x[2 * i] = p[i];
    x[2 * i + 1] = psi[i];
  }
  return x;
}

DcOpfData ieee14_case(const Ieee14Options& o) {
  if (!(o.phase_scale > 0.0) || !(o.cost_unit > 0.0)) throw Error("scales must be positive");
  DcOpfData d;
  d.name = "ieee14";
  d.buses = 14;
  d.epsilon = o.epsilon;
  struct Branch {
    int from, to;
    double x;
  };
  // 1-based bus numbers and series reactances (p.u.).
  const Branch branches[] = {{1, 2, 0.05917},  {1, 5, 0.22304},  {2, 3, 0.19797},  {2, 4, 0.17632},
                             {2, 5, 0.17388},  {3, 4, 0.17103},  {4, 5, 0.04211},  {4, 7, 0.20912},
                             {4, 9, 0.55618},  {5, 6, 0.25202},  {6, 11, 0.19890}, {6, 12, 0.25581},
                             {6, 13, 0.13027}, {7, 8, 0.17615},  {7, 9, 0.11001},  {9, 10, 0.08450},
                             {9, 14, 0.27038}, {10, 11, 0.19207}, {12, 13, 0.19988}, {13, 14, 0.34802}};
  for (const auto& br : branches) d.lines.push_back(Line{br.from - 1, br.to - 1, 1.0 / br.x / o.phase_scale});

  const double load_mw[14] = {0, 21.7, 94.2, 47.8, 7.6, 11.2, 0, 0, 29.5, 9, 3.5, 6.1, 13.5, 14.9};
  struct Gen {
    int bus;
    double pmax_mw, c2, c1;
  };
  // Quadratic cost c2 P^2 + c1 P in $/h with P in MW.
  const Gen gens[] = {{1, 332.4, 0.0430293, 20}, {2, 140, 0.25, 20}, {3, 100, 0.01, 40}, {6, 100, 0.01, 40},
                      {8, 100, 0.01, 40}};
  constexpr double base = 100.0;
  for (int i = 0; i < 14; ++i) {
    d.demand.push_back(load_mw[i] / base);
    d.cap.push_back(o.load_bus_cap);
    d.cost_quadratic.push_back(o.load_bus_quadratic / o.cost_unit);
    d.cost_linear.push_back(o.load_bus_linear / o.cost_unit);
  }
  for (const auto& g : gens) {
    const int i = g.bus - 1;
    d.cap[i] = g.pmax_mw / base;
    // c2 (base P)^2 = (c/2) P^2 in per unit.
    d.cost_quadratic[i] = 2.0 * g.c2 * base * base / o.cost_unit;
    d.cost_linear[i] = g.c1 * base / o.cost_unit;
  }
  return d;
}

Ieee14Options ieee14_bundled_options() {
  // Chosen for the conditioning of the dual at large Q (see README).
  Ieee14Options o;
  o.phase_scale = 20.0;
  o.cost_unit = 860.0;
  o.epsilon = 2.0;
  o.load_bus_cap = 0.3;
  o.load_bus_quadratic = 5000.0;
  o.load_bus_linear = 3500.0;
  return o;
}

std::string ieee14_description(const Ieee14Options& o) {
  return "IEEE 14-bus test case (public data: topology, branch reactances, bus loads, generator limits and "
         "quadratic costs from the standard case file, 100 MVA base). Changes: phase angles in units of 1/" +
         fmt_double(o.phase_scale) + " rad, costs divided by " + fmt_double(o.cost_unit) +
         ", phase regularization epsilon = " + fmt_double(o.epsilon) + ", buses without a generator get a unit with cap " +
         fmt_double(o.load_bus_cap) + " p.u. and cost " + fmt_double(o.load_bus_quadratic) + "/2 P^2 + " +
         fmt_double(o.load_bus_linear) + " P.";
}

RandomInstanceOptions equality_family(int agents) {
  RandomInstanceOptions o;
  o.agents = agents;
  o.min_primal = 1;
  o.max_primal = 3;
  o.max_eq = 2;
  o.max_ineq = 0;
  o.boxes = false;
  o.extra_edges = 2;
  o.neighbor_weight = 1.0;
  return o;
}

RandomInstanceOptions well_conditioned_family(int agents) {
  RandomInstanceOptions o;
  o.agents = agents;
  o.min_primal = 1;
  o.max_primal = 2;
  o.max_eq = 1;
  o.max_ineq = 1;
  o.boxes = true;
  o.extra_edges = 1;
  o.neighbor_weight = 0.2;
  o.curvature_min = 1.0;
  o.curvature_max = 2.0;
  return o;
}

GeneratedInstance gen_random_instance(std::uint64_t seed, const RandomInstanceOptions& o) {
  if (o.agents < 1 || o.min_primal < 1 || o.max_primal < o.min_primal || o.max_eq < 0 || o.max_ineq < 0) {
    throw DimensionError("invalid random instance options");
  }
  if (!(o.curvature_min > 0.0) || o.curvature_max < o.curvature_min) throw Error("invalid curvature range");
  std::mt19937_64 rng(seed);
  const Graph graph = random_connected_graph(o.agents, o.extra_edges, rng());
  const int n = o.agents;

  std::vector<int> nx(n);
  std::vector<ConstraintDims> dims(n);
  std::vector<Vector> xbar(n);
  std::vector<LocalCost> costs;
  for (int i = 0; i < n; ++i) {
    nx[i] = uniform_int(rng, o.min_primal, o.max_primal);
    dims[i].eq = uniform_int(rng, 0, std::min(o.max_eq, nx[i]));
    dims[i].ineq = uniform_int(rng, 0, o.max_ineq);
    xbar[i] = random_vector(rng, nx[i]);
    Vector eig(nx[i]);
    for (int t = 0; t < nx[i]; ++t) eig[t] = uniform(rng, o.curvature_min, o.curvature_max);
    const Vector q = random_vector(rng, nx[i]);
    const bool boxed = o.boxes && uniform(rng, 0.0, 1.0) < 0.5;
    if (boxed) {
      Vector lo(nx[i]), hi(nx[i]);
      for (int t = 0; t < nx[i]; ++t) {
        lo[t] = xbar[i][t] - uniform(rng, 0.5, 2.0);
        hi[t] = xbar[i][t] + uniform(rng, 0.5, 2.0);
      }
      costs.push_back(LocalCost::diagonal(eig, q, Box{lo, hi}));
    } else {
      const Matrix basis = Eigen::HouseholderQR<Matrix>(random_matrix(rng, nx[i], nx[i])).householderQ();
      Matrix h = basis * eig.asDiagonal() * basis.transpose();
      h = 0.5 * (h + h.transpose());
      costs.push_back(LocalCost::dense(h, q));
    }
  }

  // With neighbor_weight < 1 the own block is the identity plus noise, which
  // keeps the stacked coupling matrix well conditioned.
  const bool dominant = o.neighbor_weight < 1.0;
  auto own_block = [&](int rows, int cols) -> Matrix {
    if (!dominant) return random_matrix(rng, rows, cols);
    return Matrix::Identity(rows, cols) + 0.25 * random_matrix(rng, rows, cols);
  };

  std::vector<CouplingBlock> blocks;
  for (int i = 0; i < n; ++i) {
    const int p = dims[i].ineq;
    const int r = dims[i].eq;
    if (p + r == 0) continue;
    const auto& nb = graph.neighbors(i);
    std::vector<Matrix> c(nb.size()), a(nb.size());
    Vector cx = Vector::Zero(p), ax = Vector::Zero(r);
    for (std::size_t s = 0; s < nb.size(); ++s) {
      const AgentId j = nb[s];
      if (j == i) {
        c[s] = own_block(p, nx[j]);
        a[s] = own_block(r, nx[j]);
      } else {
        c[s] = o.neighbor_weight * random_matrix(rng, p, nx[j]);
        a[s] = o.neighbor_weight * random_matrix(rng, r, nx[j]);
      }
      cx += c[s] * xbar[j];
      ax += a[s] * xbar[j];
    }
    Vector margin(p);
    for (int t = 0; t < p; ++t) margin[t] = uniform(rng, 0.1, 1.0);
    for (std::size_t s = 0; s < nb.size(); ++s) {
      const bool own = nb[s] == i;
      blocks.emplace_back(i, nb[s], c[s], own ? Vector(-cx - margin) : Vector(Vector::Zero(p)), a[s],
                          own ? ax : Vector(Vector::Zero(r)));
    }
  }

  GeneratedInstance out{Problem(graph, std::move(costs), std::move(dims), std::move(blocks)), std::nullopt};
  out.slater = PrimalPoint(xbar).stacked();
  return out;
}

}  // namespace asyncdual
