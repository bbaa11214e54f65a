#include "asyncdual/graph.hpp"

#include <algorithm>
#include <string>

#include "asyncdual/errors.hpp"

namespace asyncdual {

namespace {

void sort_unique(std::vector<AgentId>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Graph Graph::from_edges(int num_agents, const std::vector<std::pair<AgentId, AgentId>>& edges) {
  if (num_agents <= 0) throw DimensionError("graph needs at least one agent");
  std::vector<std::vector<AgentId>> lists(num_agents);
  for (int i = 0; i < num_agents; ++i) lists[i].push_back(i);
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= num_agents || b >= num_agents) {
      throw DimensionError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                           ") references an agent outside [0," + std::to_string(num_agents) + ")");
    }
    lists[a].push_back(b);
    lists[b].push_back(a);
  }
  return from_neighbor_lists(std::move(lists));
}

Graph Graph::from_neighbor_lists(std::vector<std::vector<AgentId>> lists) {
  const int n = static_cast<int>(lists.size());
  for (auto& l : lists) {
    sort_unique(l);
    for (AgentId j : l) {
      if (j < 0 || j >= n) throw DimensionError("neighbor index " + std::to_string(j) + " out of range");
    }
  }
  Graph g;
  g.neighbors_ = std::move(lists);
  return g;
}

int Graph::slot(AgentId i, AgentId j) const {
  const auto& l = neighbors_.at(i);
  auto it = std::lower_bound(l.begin(), l.end(), j);
  if (it == l.end() || *it != j) return -1;
  return static_cast<int>(it - l.begin());
}

bool Graph::is_symmetric() const {
  for (int i = 0; i < size(); ++i) {
    for (AgentId j : neighbors_[i]) {
      if (!adjacent(j, i)) return false;
    }
  }
  return true;
}

bool Graph::has_self_loops() const {
  for (int i = 0; i < size(); ++i) {
    if (!adjacent(i, i)) return false;
  }
  return true;
}

bool Graph::is_connected() const {
  if (size() == 0) return true;
  std::vector<char> seen(size(), 0);
  std::vector<AgentId> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    AgentId i = stack.back();
    stack.pop_back();
    for (AgentId j : neighbors_[i]) {
      if (!seen[j]) {
        seen[j] = 1;
        ++count;
        stack.push_back(j);
      }
    }
  }
  return count == size();
}

std::vector<std::pair<AgentId, AgentId>> Graph::edges() const {
  std::vector<std::pair<AgentId, AgentId>> out;
  for (int i = 0; i < size(); ++i) {
    for (AgentId j : neighbors_[i]) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

std::vector<AgentId> Graph::two_hop(AgentId i) const {
  std::vector<AgentId> out;
  for (AgentId j : neighbors(i)) {
    out.push_back(j);
    for (AgentId l : neighbors(j)) out.push_back(l);
  }
  sort_unique(out);
  return out;
}

Graph path_graph(int n) {
  std::vector<std::pair<AgentId, AgentId>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph::from_edges(n, e);
}

Graph ring_graph(int n) {
  std::vector<std::pair<AgentId, AgentId>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return Graph::from_edges(n, e);
}

Graph complete_graph(int n) {
  std::vector<std::pair<AgentId, AgentId>> e;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  }
  return Graph::from_edges(n, e);
}

}  // namespace asyncdual
