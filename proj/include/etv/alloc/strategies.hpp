#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "etv/types.hpp"

namespace etv::alloc {

enum class Strategy { HA, Exact, Manual, Greedy };

std::string_view to_string(Strategy strategy);
// "ha", "exact", "manual", "greedy"; throws ConfigError.
Strategy parse_strategy(std::string_view name);

struct AllocationStats {
  std::size_t repairs = 0;        // stranded users resolved by an augmenting path
  std::size_t recomputations = 0; // alpha/h refreshes after a fund saturated (HA only)
};

// Heuristic allocation: users are served in descending order of a regret
// score h_i = ((alpha_a + alpha_b) / 2) * (2 e_a - e_b - e_c), where e_a >=
// e_b >= e_c are the user's three best masked ETVs among unsaturated funds
// and alpha_j is the fund's masked ETV mass per remaining slot. Each user
// takes its best eligible fund with capacity; when a fund fills up, alpha
// and h are recomputed for the users still waiting. A user whose eligible
// funds are all full is placed by shifting members along the chain of funds
// that loses the least ETV and ends at a fund with spare capacity.
//
// All strategies validate the instance first (ShapeError, DemandMismatch,
// Infeasible) and return plans that satisfy every demand and risk
// constraint.
AllocationPlan allocate_ha(const Instance& instance, const EtvMatrix& etv, AllocationStats* stats = nullptr);

// Maximum-ETV plan. Successive shortest paths on the user/fund transportation
// network: users are inserted one at a time, each along the cheapest chain of
// reassignments (user -> fund -> displaced user -> fund ... -> fund with spare
// capacity). Paths are searched on the K-node fund graph whose arc j -> j'
// costs the cheapest move of a user currently in j over to j', kept in
// per-arc heaps.
AllocationPlan allocate_exact(const Instance& instance, const EtvMatrix& etv);

// Funds are filled in `priority` order, each taking its top-d_j remaining
// eligible users by ETV (ties to the lower user id). Throws Infeasible when
// a fund runs out of eligible users, ConfigError when `priority` is not a
// permutation of the fund ids.
AllocationPlan allocate_manual(const Instance& instance, const EtvMatrix& etv, std::span<const int> priority);

// Users in id order, each to its best eligible fund with capacity.
AllocationPlan allocate_greedy(const Instance& instance, const EtvMatrix& etv, AllocationStats* stats = nullptr);

AllocationPlan allocate(Strategy strategy, const Instance& instance, const EtvMatrix& etv,
                        std::span<const int> priority = {});

// Default manual priority: funds by descending risk level, then by
// descending mean ETV over eligible users, then by id. Serving the riskiest
// funds first never strands a fund on a feasible instance, since their
// eligible users are a subset of everyone else's.
std::vector<int> default_priority(const Instance& instance, const EtvMatrix& etv);

}  // namespace etv::alloc
