#include <algorithm>
#include <numeric>
#include <string>

#include "assignment_state.hpp"
#include "etv/alloc/strategies.hpp"

namespace etv::alloc {

namespace {

struct Scored {
  double h;
  std::size_t user;
};

// Working view of the heuristic: alpha per open fund and h per waiting user,
// both computed from the masked ETV (zero when ineligible or saturated).
class HeuristicScorer {
 public:
  HeuristicScorer(const Instance& instance, const EtvMatrix& etv, const detail::AssignmentState& state)
      : instance_(instance), etv_(etv), state_(state), alpha_(instance.num_funds(), 0.0) {}

  double masked(std::size_t i, std::size_t j) const {
    return state_.saturated(j) || !instance_.eligible(i, j) ? 0.0 : etv_(i, j);
  }

  void compute_alpha(const std::vector<std::size_t>& waiting) {
    const std::size_t k = instance_.num_funds();
    std::fill(alpha_.begin(), alpha_.end(), 0.0);
    for (std::size_t i : waiting) {
      for (std::size_t j = 0; j < k; ++j) alpha_[j] += masked(i, j);
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (!state_.saturated(j)) alpha_[j] /= static_cast<double>(state_.remaining(j));
    }
  }

  double score(std::size_t i) const {
    // Top three open funds by masked ETV, ties to the lower fund id. Missing
    // second/third slots contribute ETV 0 and a missing b reuses alpha_a.
    constexpr int kNone = -1;
    int top[3] = {kNone, kNone, kNone};
    double value[3] = {0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < instance_.num_funds(); ++j) {
      if (state_.saturated(j)) continue;
      const double v = masked(i, j);
      for (int slot = 0; slot < 3; ++slot) {
        if (top[slot] == kNone || v > value[slot]) {
          for (int shift = 2; shift > slot; --shift) {
            top[shift] = top[shift - 1];
            value[shift] = value[shift - 1];
          }
          top[slot] = static_cast<int>(j);
          value[slot] = v;
          break;
        }
      }
    }
    if (top[0] == kNone) return 0.0;
    const double alpha_a = alpha_[top[0]];
    const double alpha_b = top[1] == kNone ? alpha_a : alpha_[top[1]];
    return 0.5 * (alpha_a + alpha_b) * (2.0 * value[0] - value[1] - value[2]);
  }

 private:
  const Instance& instance_;
  const EtvMatrix& etv_;
  const detail::AssignmentState& state_;
  std::vector<double> alpha_;
};

// Users in descending h, ties to the lower id.
std::vector<std::size_t> order_by_score(HeuristicScorer& scorer, const std::vector<std::size_t>& waiting) {
  scorer.compute_alpha(waiting);
  std::vector<Scored> scored;
  scored.reserve(waiting.size());
  for (std::size_t i : waiting) scored.push_back({scorer.score(i), i});
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return a.h != b.h ? a.h > b.h : a.user < b.user;
  });
  std::vector<std::size_t> order;
  order.reserve(scored.size());
  for (const auto& s : scored) order.push_back(s.user);
  return order;
}

void place(detail::AssignmentState& state, std::size_t user, AllocationStats& stats) {
  if (const auto fund = state.best_open_fund(user)) {
    state.assign(user, *fund);
    return;
  }
  if (!state.repair(user)) {
    throw Error(ErrorKind::StrandedUser, "user " + std::to_string(user) + " cannot be placed");
  }
  ++stats.repairs;
}

}  // namespace

AllocationPlan allocate_ha(const Instance& instance, const EtvMatrix& etv, AllocationStats* stats) {
  detail::require_allocatable(instance, etv);
  AllocationStats local;
  detail::AssignmentState state(instance, etv);
  HeuristicScorer scorer(instance, etv, state);

  std::vector<std::size_t> waiting(instance.num_users());
  std::iota(waiting.begin(), waiting.end(), 0);
  std::vector<std::size_t> order = order_by_score(scorer, waiting);

  std::vector<bool> was_saturated(instance.num_funds());
  auto snapshot = [&] {
    for (std::size_t j = 0; j < instance.num_funds(); ++j) was_saturated[j] = state.saturated(j);
  };
  snapshot();

  std::size_t pos = 0;
  while (pos < order.size()) {
    place(state, order[pos++], local);

    bool newly_saturated = false;
    for (std::size_t j = 0; j < instance.num_funds(); ++j) newly_saturated |= state.saturated(j) && !was_saturated[j];
    if (newly_saturated && pos < order.size()) {
      snapshot();
      waiting.assign(order.begin() + static_cast<std::ptrdiff_t>(pos), order.end());
      order = order_by_score(scorer, waiting);
      pos = 0;
      ++local.recomputations;
    }
  }
  if (stats) *stats = local;
  return state.plan();
}

AllocationPlan allocate_greedy(const Instance& instance, const EtvMatrix& etv, AllocationStats* stats) {
  detail::require_allocatable(instance, etv);
  AllocationStats local;
  detail::AssignmentState state(instance, etv);
  for (std::size_t i = 0; i < instance.num_users(); ++i) place(state, i, local);
  if (stats) *stats = local;
  return state.plan();
}

}  // namespace etv::alloc
