#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>

#include "assignment_state.hpp"
#include "etv/alloc/strategies.hpp"

namespace etv::alloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct MoveEntry {
  double cost;  // etv(user, from) - etv(user, to): added cost of the move
  std::size_t user;
  std::uint32_t stamp;

  bool operator>(const MoveEntry& other) const {
    return cost != other.cost ? cost > other.cost : user > other.user;
  }
};

using MoveHeap = std::priority_queue<MoveEntry, std::vector<MoveEntry>, std::greater<>>;

// Min-cost assignment grown one user at a time. All costs are negated ETVs;
// the residual network's user nodes are contracted away, so the only nodes
// left are funds and an arc j -> j' carries the cheapest single-user move.
class TransportationSolver {
 public:
  TransportationSolver(const Instance& instance, const EtvMatrix& etv)
      : instance_(instance),
        etv_(etv),
        k_(instance.num_funds()),
        assignment_(instance.num_users(), -1),
        stamp_(instance.num_users(), 0),
        load_(k_, 0),
        moves_(k_ * k_) {}

  AllocationPlan solve() {
    for (std::size_t u = 0; u < instance_.num_users(); ++u) insert(u);
    return AllocationPlan{assignment_};
  }

 private:
  MoveHeap& heap(std::size_t from, std::size_t to) { return moves_[from * k_ + to]; }

  // Cheapest valid move from `from` to `to`, discarding stale entries.
  const MoveEntry* top(std::size_t from, std::size_t to) {
    MoveHeap& h = heap(from, to);
    while (!h.empty()) {
      const MoveEntry& e = h.top();
      if (assignment_[e.user] == static_cast<int>(from) && stamp_[e.user] == e.stamp) return &e;
      h.pop();
    }
    return nullptr;
  }

  void place(std::size_t user, std::size_t fund) {
    if (assignment_[user] >= 0) --load_[assignment_[user]];
    assignment_[user] = static_cast<int>(fund);
    ++stamp_[user];
    ++load_[fund];
    for (std::size_t to = 0; to < k_; ++to) {
      if (to == fund || !instance_.eligible(user, to)) continue;
      heap(fund, to).push({etv_(user, fund) - etv_(user, to), user, stamp_[user]});
    }
  }

  void insert(std::size_t user) {
    std::vector<double> dist(k_, kInf);
    std::vector<int> parent(k_, -1);
    for (std::size_t j = 0; j < k_; ++j) {
      if (instance_.eligible(user, j)) dist[j] = -etv_(user, j);
    }

    // Bellman-Ford over K fund nodes; the residual graph has no negative
    // cycles because the current partial assignment is optimal.
    for (std::size_t round = 0; round < k_; ++round) {
      bool changed = false;
      for (std::size_t from = 0; from < k_; ++from) {
        if (dist[from] == kInf) continue;
        for (std::size_t to = 0; to < k_; ++to) {
          if (to == from) continue;
          const MoveEntry* e = top(from, to);
          if (!e) continue;
          const double candidate = dist[from] + e->cost;
          const bool better = dist[to] == kInf || candidate < dist[to] - 1e-12 * (1.0 + std::abs(dist[to]));
          if (better) {
            dist[to] = candidate;
            parent[to] = static_cast<int>(from);
            changed = true;
          }
        }
      }
      if (!changed) break;
    }

    int target = -1;
    for (std::size_t j = 0; j < k_; ++j) {
      if (dist[j] == kInf || load_[j] >= instance_.funds[j].demand) continue;
      if (target < 0 || dist[j] < dist[target]) target = static_cast<int>(j);
    }
    if (target < 0) {
      throw Error(ErrorKind::Infeasible, "no augmenting path for user " + std::to_string(user));
    }

    // Collect the chain before touching any heap.
    std::vector<std::pair<std::size_t, std::size_t>> hops;  // (mover, destination)
    int to = target;
    while (parent[to] >= 0) {
      const int from = parent[to];
      hops.emplace_back(top(from, to)->user, to);
      to = from;
      if (hops.size() > k_) throw Error(ErrorKind::Infeasible, "cycle in shortest-path tree");
    }
    for (const auto& [mover, destination] : hops) place(mover, destination);
    place(user, to);
  }

  const Instance& instance_;
  const EtvMatrix& etv_;
  std::size_t k_;
  std::vector<int> assignment_;
  std::vector<std::uint32_t> stamp_;
  std::vector<int> load_;
  std::vector<MoveHeap> moves_;
};

}  // namespace

AllocationPlan allocate_exact(const Instance& instance, const EtvMatrix& etv) {
  detail::require_allocatable(instance, etv);
  return TransportationSolver(instance, etv).solve();
}

}  // namespace etv::alloc
