#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <vector>

#include "etv/types.hpp"

namespace etv::alloc::detail {

// Validates the instance and that the ETV matrix matches it.
void require_allocatable(const Instance& instance, const EtvMatrix& etv);

// Partial assignment used by the greedy-style strategies. For every ordered
// fund pair (from, to) it keeps a lazy min-heap of the members of `from`
// eligible for `to`, keyed by the ETV lost when moving them, so stranded
// users can be placed along the cheapest chain of moves.
class AssignmentState {
 public:
  AssignmentState(const Instance& instance, const EtvMatrix& etv);

  bool assigned(std::size_t user) const { return assignment_[user] >= 0; }
  int remaining(std::size_t fund) const { return remaining_[fund]; }
  bool saturated(std::size_t fund) const { return remaining_[fund] == 0; }

  // Highest-ETV eligible fund with spare capacity; ties to the lower id.
  std::optional<int> best_open_fund(std::size_t user) const;

  void assign(std::size_t user, int fund);

  // Places a user whose eligible funds are all full: the user enters some
  // fund and members shift along a chain of funds ending at one with spare
  // capacity, choosing the chain that loses the least ETV. Returns false
  // only when no chain exists (never on a feasible instance).
  bool repair(std::size_t user);

  AllocationPlan plan() const { return AllocationPlan{assignment_}; }

 private:
  struct Move {
    double loss;  // etv(user, from) - etv(user, to)
    std::size_t user;
    std::uint32_t stamp;
    bool operator>(const Move& other) const { return loss != other.loss ? loss > other.loss : user > other.user; }
  };
  using MoveHeap = std::priority_queue<Move, std::vector<Move>, std::greater<>>;

  void place(std::size_t user, int fund);
  void push_moves(std::size_t user);
  // Heaps are built on the first repair; plain assignments before that only
  // record the fund.
  void build_moves();
  const Move* cheapest_move(std::size_t from, std::size_t to);

  const Instance& instance_;
  const EtvMatrix& etv_;
  std::size_t k_;
  std::vector<int> assignment_;
  std::vector<std::uint32_t> stamp_;
  std::vector<int> remaining_;
  std::vector<MoveHeap> moves_;  // [from * k + to]
  bool moves_built_ = false;
};

}  // namespace etv::alloc::detail
