#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "etv/types.hpp"

// Exhaustive references, deliberately free of any library logic beyond the
// plain data types.
namespace oracle {

// Calls visit(assignment) for every plan that meets the demands exactly and
// respects risk eligibility. K^N enumeration; keep N small.
template <class Visit>
void for_each_feasible_plan(const etv::Instance& inst, Visit visit) {
  const std::size_t n = inst.users.size();
  const std::size_t k = inst.funds.size();
  std::vector<int> assignment(n, 0);
  std::vector<int> load(k, 0);
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == n) {
      for (std::size_t j = 0; j < k; ++j) {
        if (load[j] != inst.funds[j].demand) return;
      }
      visit(assignment);
      return;
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (inst.users[i].risk_tolerance < inst.funds[j].risk_level) continue;
      if (load[j] >= inst.funds[j].demand) continue;
      assignment[i] = static_cast<int>(j);
      ++load[j];
      self(self, i + 1);
      --load[j];
    }
  };
  rec(rec, 0);
}

// Best objective over all feasible plans; nullopt when none exists.
inline std::optional<double> brute_force_best(const etv::Instance& inst, const etv::EtvMatrix& etv) {
  std::optional<double> best;
  for_each_feasible_plan(inst, [&](const std::vector<int>& a) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += etv(i, static_cast<std::size_t>(a[i]));
    if (!best || total > *best) best = total;
  });
  return best;
}

inline bool brute_force_feasible(const etv::Instance& inst) {
  bool any = false;
  for_each_feasible_plan(inst, [&](const std::vector<int>&) { any = true; });
  return any;
}

struct Hits {
  long long thc = 0;
  double tha = 0.0;
};

// THC/THA from first principles: scan each row for its first maximum.
inline Hits hits(const etv::EtvMatrix& etv, const std::vector<etv::Observation>& grid_row_major) {
  Hits h;
  for (std::size_t i = 0; i < etv.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < etv.cols(); ++j) {
      if (etv(i, j) > etv(i, best)) best = j;
    }
    const etv::Observation& o = grid_row_major[i * etv.cols() + best];
    h.thc += o.converted ? 1 : 0;
    h.tha += o.amount;
  }
  return h;
}

}  // namespace oracle
