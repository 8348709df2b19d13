#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "etv/types.hpp"

namespace testing {

// Tolerances in [0, max_level], fund 0 at risk 0, demands random but
// summing to N. Not necessarily feasible.
inline etv::Instance random_instance(std::mt19937_64& rng, std::size_t n, std::size_t k, int max_level = 3) {
  etv::Instance inst;
  std::uniform_int_distribution<int> level(0, max_level);
  for (std::size_t i = 0; i < n; ++i) inst.users.push_back({static_cast<int>(i), {}, level(rng)});
  for (std::size_t j = 0; j < k; ++j) inst.funds.push_back({static_cast<int>(j), {}, j == 0 ? 0 : level(rng), 0});
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  for (std::size_t i = 0; i < n; ++i) ++inst.funds[pick(rng)].demand;
  return inst;
}

// ETVs drawn from a small integer grid so ties are common, or continuous.
inline etv::EtvMatrix random_etv(std::mt19937_64& rng, std::size_t n, std::size_t k, bool integer_valued) {
  etv::EtvMatrix etv(n, k);
  std::uniform_int_distribution<int> small(0, 5);
  std::exponential_distribution<double> heavy(0.1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) etv.set(i, j, integer_valued ? small(rng) : heavy(rng));
  }
  return etv;
}

// The 3 x 2 worked example: ETV [[5,1],[4,3],[2,2]], demands [1,2],
// everyone eligible everywhere.
inline etv::Instance three_by_two() {
  etv::Instance inst;
  for (int i = 0; i < 3; ++i) inst.users.push_back({i, {}, 1});
  inst.funds.push_back({0, {}, 0, 1});
  inst.funds.push_back({1, {}, 1, 2});
  return inst;
}

inline etv::EtvMatrix three_by_two_etv() { return etv::EtvMatrix(3, 2, {5, 1, 4, 3, 2, 2}); }

}  // namespace testing
