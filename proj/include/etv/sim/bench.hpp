#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "etv/sim/generator.hpp"

namespace etv::sim {

struct BenchConfig {
  std::vector<std::size_t> sizes{2000, 10000, 50000, 200000};
  // Everything but num_users is taken from here.
  GeneratorConfig generator;
  // Exact is skipped for N above this.
  std::size_t exact_cutoff = 50000;
  std::uint64_t seed = kDefaultSeed;

  void validate() const;
};

struct BenchRow {
  std::size_t num_users = 0;
  std::string strategy;
  double objective = 0.0;
  double runtime_ms = 0.0;
  // objective / exact objective; 0 when exact was skipped.
  double objective_ratio = 0.0;
};

// Allocates on the generator's true ETV at every ladder size with HA and,
// up to the cutoff, exact. Rows come in ladder order, HA before exact.
std::vector<BenchRow> run_bench(const BenchConfig& config);

void write_bench_csv(const std::filesystem::path& path, std::span<const BenchRow> rows);
// One line per N: objectives, runtimes, objective ratio and the exact/HA
// speed-up (exact columns are 0 where exact was skipped).
void write_bench_plot_csv(const std::filesystem::path& path, std::span<const BenchRow> rows);

}  // namespace etv::sim
