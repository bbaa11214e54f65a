#pragma once

#include <utility>
#include <vector>

#include "asyncdual/types.hpp"

namespace asyncdual {

/// Undirected communication graph. Neighbor lists are sorted and, when built
/// through from_edges(), contain the agent itself.
class Graph {
 public:
  Graph() = default;

  /// Symmetrizes the edge list and adds every self-loop.
  static Graph from_edges(int num_agents, const std::vector<std::pair<AgentId, AgentId>>& edges);

  /// Takes the lists as given (sorted and deduplicated, nothing else). Used to
  /// represent malformed graphs that validate_problem() should reject.
  static Graph from_neighbor_lists(std::vector<std::vector<AgentId>> lists);

  int size() const { return static_cast<int>(neighbors_.size()); }
  const std::vector<AgentId>& neighbors(AgentId i) const { return neighbors_.at(i); }

  /// Position of j in neighbors(i), or -1.
  int slot(AgentId i, AgentId j) const;
  bool adjacent(AgentId i, AgentId j) const { return slot(i, j) >= 0; }

  bool is_symmetric() const;
  bool has_self_loops() const;
  bool is_connected() const;

  /// Undirected edges (i < j), self-loops excluded.
  std::vector<std::pair<AgentId, AgentId>> edges() const;

  /// N_i together with every N_j, j in N_i. Sorted.
  std::vector<AgentId> two_hop(AgentId i) const;

 private:
  std::vector<std::vector<AgentId>> neighbors_;
};

Graph path_graph(int n);
Graph ring_graph(int n);
Graph complete_graph(int n);

}  // namespace asyncdual
