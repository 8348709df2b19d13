#include "etv/alloc/strategies.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "assignment_state.hpp"

namespace etv::alloc {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::HA: return "ha";
    case Strategy::Exact: return "exact";
    case Strategy::Manual: return "manual";
    case Strategy::Greedy: return "greedy";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "ha") return Strategy::HA;
  if (lower == "exact") return Strategy::Exact;
  if (lower == "manual") return Strategy::Manual;
  if (lower == "greedy") return Strategy::Greedy;
  throw Error(ErrorKind::ConfigError, "unknown strategy '" + std::string(name) + "'");
}

AllocationPlan allocate_manual(const Instance& instance, const EtvMatrix& etv, std::span<const int> priority) {
  detail::require_allocatable(instance, etv);
  const std::size_t n = instance.num_users();
  const std::size_t k = instance.num_funds();

  std::vector<bool> seen(k, false);
  if (priority.size() != k) throw Error(ErrorKind::ConfigError, "priority must list every fund exactly once");
  for (int j : priority) {
    if (j < 0 || static_cast<std::size_t>(j) >= k || seen[j]) {
      throw Error(ErrorKind::ConfigError, "priority must be a permutation of the fund ids");
    }
    seen[j] = true;
  }

  AllocationPlan plan{std::vector<int>(n, -1)};
  std::vector<std::size_t> candidates;
  for (int j : priority) {
    candidates.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (plan.assignment[i] < 0 && instance.eligible(i, j)) candidates.push_back(i);
    }
    const auto demand = static_cast<std::size_t>(instance.funds[j].demand);
    if (candidates.size() < demand) {
      throw Error(ErrorKind::Infeasible, "fund " + std::to_string(j) + " needs " + std::to_string(demand) +
                                             " users but only " + std::to_string(candidates.size()) +
                                             " eligible users remain");
    }
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(demand), candidates.end(),
                      [&](std::size_t a, std::size_t b) { return etv(a, j) != etv(b, j) ? etv(a, j) > etv(b, j) : a < b; });
    for (std::size_t r = 0; r < demand; ++r) plan.assignment[candidates[r]] = j;
  }
  return plan;
}

std::vector<int> default_priority(const Instance& instance, const EtvMatrix& etv) {
  const std::size_t k = instance.num_funds();
  std::vector<double> mean(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < instance.num_users(); ++i) {
      if (!instance.eligible(i, j)) continue;
      mean[j] += etv(i, j);
      ++count;
    }
    if (count > 0) mean[j] /= static_cast<double>(count);
  }
  std::vector<int> order(k);
  for (std::size_t j = 0; j < k; ++j) order[j] = static_cast<int>(j);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const int ra = instance.funds[a].risk_level;
    const int rb = instance.funds[b].risk_level;
    return ra != rb ? ra > rb : mean[a] > mean[b];
  });
  return order;
}

AllocationPlan allocate(Strategy strategy, const Instance& instance, const EtvMatrix& etv,
                        std::span<const int> priority) {
  switch (strategy) {
    case Strategy::HA: return allocate_ha(instance, etv);
    case Strategy::Exact: return allocate_exact(instance, etv);
    case Strategy::Greedy: return allocate_greedy(instance, etv);
    case Strategy::Manual: {
      if (!priority.empty()) return allocate_manual(instance, etv, priority);
      const auto order = default_priority(instance, etv);
      return allocate_manual(instance, etv, order);
    }
  }
  throw Error(ErrorKind::ConfigError, "unknown strategy");
}

}  // namespace etv::alloc
