#pragma once

#include <cstdint>
#include <vector>

namespace etv {

// Dinic max-flow on a directed graph with integer capacities.
class MaxFlow {
 public:
  explicit MaxFlow(int num_nodes);

  // Returns the edge index; the reverse edge is index ^ 1.
  int add_edge(int from, int to, std::int64_t capacity);

  std::int64_t solve(int source, int sink);

  std::int64_t flow_on(int edge) const { return edges_[edge ^ 1].capacity; }

 private:
  struct Edge {
    int to;
    std::int64_t capacity;
  };

  bool build_levels(int source, int sink);
  std::int64_t push(int node, int sink, std::int64_t limit);

  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<int> level_;
  std::vector<std::size_t> cursor_;
};

}  // namespace etv
