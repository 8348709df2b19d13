#include "assignment_state.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "etv/validate.hpp"

namespace etv::alloc::detail {

void require_allocatable(const Instance& instance, const EtvMatrix& etv) {
  throw_if_any(validate_instance(instance));
  if (etv.rows() != instance.num_users() || etv.cols() != instance.num_funds()) {
    throw Error(ErrorKind::ShapeError, "etv matrix is " + std::to_string(etv.rows()) + "x" +
                                           std::to_string(etv.cols()) + " but the instance has " +
                                           std::to_string(instance.num_users()) + " users and " +
                                           std::to_string(instance.num_funds()) + " funds");
  }
}

AssignmentState::AssignmentState(const Instance& instance, const EtvMatrix& etv)
    : instance_(instance),
      etv_(etv),
      k_(instance.num_funds()),
      assignment_(instance.num_users(), -1),
      stamp_(instance.num_users(), 0),
      remaining_(k_),
      moves_(k_ * k_) {
  for (std::size_t j = 0; j < k_; ++j) remaining_[j] = instance.funds[j].demand;
}

std::optional<int> AssignmentState::best_open_fund(std::size_t user) const {
  std::optional<int> best;
  double best_value = -1.0;
  for (std::size_t j = 0; j < k_; ++j) {
    if (remaining_[j] == 0 || !instance_.eligible(user, j)) continue;
    const double value = etv_(user, j);
    if (!best || value > best_value) {
      best = static_cast<int>(j);
      best_value = value;
    }
  }
  return best;
}

void AssignmentState::place(std::size_t user, int fund) {
  assignment_[user] = fund;
  ++stamp_[user];
  if (moves_built_) push_moves(user);
}

void AssignmentState::push_moves(std::size_t user) {
  const auto from = static_cast<std::size_t>(assignment_[user]);
  for (std::size_t to = 0; to < k_; ++to) {
    if (to == from || !instance_.eligible(user, to)) continue;
    moves_[from * k_ + to].push({etv_(user, from) - etv_(user, to), user, stamp_[user]});
  }
}

void AssignmentState::build_moves() {
  std::vector<std::vector<Move>> pending(k_ * k_);
  for (std::size_t user = 0; user < assignment_.size(); ++user) {
    if (assignment_[user] < 0) continue;
    const auto from = static_cast<std::size_t>(assignment_[user]);
    for (std::size_t to = 0; to < k_; ++to) {
      if (to == from || !instance_.eligible(user, to)) continue;
      pending[from * k_ + to].push_back({etv_(user, from) - etv_(user, to), user, stamp_[user]});
    }
  }
  for (std::size_t a = 0; a < pending.size(); ++a) moves_[a] = MoveHeap(std::greater<>{}, std::move(pending[a]));
  moves_built_ = true;
}

const AssignmentState::Move* AssignmentState::cheapest_move(std::size_t from, std::size_t to) {
  MoveHeap& heap = moves_[from * k_ + to];
  while (!heap.empty()) {
    const Move& m = heap.top();
    if (assignment_[m.user] == static_cast<int>(from) && stamp_[m.user] == m.stamp) return &m;
    heap.pop();
  }
  return nullptr;
}

void AssignmentState::assign(std::size_t user, int fund) {
  place(user, fund);
  --remaining_[fund];
}

bool AssignmentState::repair(std::size_t user) {
  if (!moves_built_) build_moves();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> loss(k_, kInf);
  std::vector<int> parent(k_, -1);
  for (std::size_t j = 0; j < k_; ++j) {
    if (instance_.eligible(user, j)) loss[j] = -etv_(user, j);
  }
  // A partial greedy assignment can hold loss-reducing cycles, so a
  // relaxation is skipped when `to` already lies on the chain into `from`;
  // chains stay simple.
  auto on_chain = [&](std::size_t from, std::size_t to) {
    for (int j = static_cast<int>(from); j >= 0; j = parent[j]) {
      if (j == static_cast<int>(to)) return true;
    }
    return false;
  };
  for (std::size_t round = 0; round < k_; ++round) {
    bool changed = false;
    for (std::size_t from = 0; from < k_; ++from) {
      if (loss[from] == kInf) continue;
      for (std::size_t to = 0; to < k_; ++to) {
        if (to == from) continue;
        const Move* m = cheapest_move(from, to);
        if (!m) continue;
        const double candidate = loss[from] + m->loss;
        const bool better = loss[to] == kInf || candidate < loss[to] - 1e-12 * (1.0 + std::abs(loss[to]));
        if (better && !on_chain(from, to)) {
          loss[to] = candidate;
          parent[to] = static_cast<int>(from);
          changed = true;
        }
      }
    }
    if (!changed) break;
  }

  int target = -1;
  for (std::size_t j = 0; j < k_; ++j) {
    if (loss[j] == kInf || remaining_[j] == 0) continue;
    if (target < 0 || loss[j] < loss[target]) target = static_cast<int>(j);
  }
  if (target < 0) return false;

  std::vector<std::pair<std::size_t, int>> hops;  // (mover, destination)
  int to = target;
  while (parent[to] >= 0) {
    const int from = parent[to];
    hops.emplace_back(cheapest_move(static_cast<std::size_t>(from), static_cast<std::size_t>(to))->user, to);
    to = from;
  }
  for (const auto& [mover, destination] : hops) place(mover, destination);
  place(user, to);
  --remaining_[target];
  return true;
}

}  // namespace etv::alloc::detail
