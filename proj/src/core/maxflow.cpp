#include "etv/maxflow.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace etv {

MaxFlow::MaxFlow(int num_nodes) : adjacency_(num_nodes), level_(num_nodes), cursor_(num_nodes) {}

int MaxFlow::add_edge(int from, int to, std::int64_t capacity) {
  const int index = static_cast<int>(edges_.size());
  edges_.push_back({to, capacity});
  adjacency_[from].push_back(index);
  edges_.push_back({from, 0});
  adjacency_[to].push_back(index + 1);
  return index;
}

bool MaxFlow::build_levels(int source, int sink) {
  std::fill(level_.begin(), level_.end(), -1);
  std::queue<int> frontier;
  level_[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const int node = frontier.front();
    frontier.pop();
    for (int e : adjacency_[node]) {
      const Edge& edge = edges_[e];
      if (edge.capacity > 0 && level_[edge.to] < 0) {
        level_[edge.to] = level_[node] + 1;
        frontier.push(edge.to);
      }
    }
  }
  return level_[sink] >= 0;
}

std::int64_t MaxFlow::push(int node, int sink, std::int64_t limit) {
  if (node == sink) return limit;
  for (auto& i = cursor_[node]; i < adjacency_[node].size(); ++i) {
    const int e = adjacency_[node][i];
    Edge& edge = edges_[e];
    if (edge.capacity <= 0 || level_[edge.to] != level_[node] + 1) continue;
    const std::int64_t pushed = push(edge.to, sink, std::min(limit, edge.capacity));
    if (pushed > 0) {
      edge.capacity -= pushed;
      edges_[e ^ 1].capacity += pushed;
      return pushed;
    }
  }
  return 0;
}

std::int64_t MaxFlow::solve(int source, int sink) {
  std::int64_t total = 0;
  while (build_levels(source, sink)) {
    std::fill(cursor_.begin(), cursor_.end(), 0);
    while (const std::int64_t pushed = push(source, sink, std::numeric_limits<std::int64_t>::max())) {
      total += pushed;
    }
  }
  return total;
}

}  // namespace etv
