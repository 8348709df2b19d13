#pragma once

#include <string>
#include <vector>

#include "etv/error.hpp"
#include "etv/types.hpp"

namespace etv {

struct Violation {
  ErrorKind kind;
  std::string message;
};

using Violations = std::vector<Violation>;

// Checks shapes, dense ids, demand and risk ranges, sum(demand) == N, and
// runs a max-flow feasibility check over the eligibility graph. Returns an
// empty list when the instance is valid and feasible.
Violations validate_instance(const Instance& instance, int max_risk_level = kDefaultMaxRiskLevel);

// Checks one-fund-per-user, exact demands and risk eligibility.
Violations validate_plan(const Instance& instance, const AllocationPlan& plan);

// Throws an Error carrying the first violation, if any.
void throw_if_any(const Violations& violations);

// True iff some plan satisfies every demand under the risk constraint.
// Does not require sum(demand) == N; it checks that all demands can be
// saturated and that every user can be placed.
bool is_feasible(const Instance& instance);

// Sum of etv(i, assignment[i]).
double objective(const EtvMatrix& etv, const AllocationPlan& plan);

}  // namespace etv
