#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "etv/alloc/strategies.hpp"
#include "etv/model/train.hpp"
#include "etv/sim/generator.hpp"
#include "etv/sim/metrics.hpp"

namespace etv::sim {

struct ExperimentConfig {
  GeneratorConfig generator;
  model::TrainConfig train;
  std::vector<alloc::Strategy> strategies{alloc::Strategy::HA, alloc::Strategy::Exact, alloc::Strategy::Manual,
                                          alloc::Strategy::Greedy};
  std::vector<model::LossKind> losses{model::LossKind::ESJ, model::LossKind::ZILN, model::LossKind::CE_MSE};
  // Adds a "truth" source that allocates on the generator's true ETV.
  bool include_truth = false;
  // Manual strategy priority; empty means alloc::default_priority.
  std::vector<int> manual_priority;
  // Fill runtime_ms; the report is then no longer byte-reproducible.
  bool record_timing = false;
  // Root seed for generation and training (overrides generator.seed and
  // train.seed).
  std::uint64_t seed = kDefaultSeed;

  void validate() const;
};

// One bar group of the argmax comparison: how well a source's ETV ranks
// funds per user, independent of demand constraints.
struct SourceSummary {
  std::string source;
  std::uint64_t seed = 0;
  std::int64_t thc = 0;
  double tha = 0.0;
  double auc = 0.0;      // ETV as a score for conversion, over all test pairs
  double log_mse = 0.0;  // see log_etv_mse
};

struct ExperimentResult {
  std::vector<MetricsReport> reports;  // one row per (source, strategy)
  std::vector<SourceSummary> summaries;
};

// Generates a train and a test dataset from the root seed, trains one model
// per loss on the full train grid, predicts ETV for the test users, runs
// every strategy, and scores plans against the simulated test outcomes.
ExperimentResult run_experiment(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
// Unknown keys raise ConfigError.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

void write_summaries_csv(const std::filesystem::path& path, std::span<const SourceSummary> rows);

}  // namespace etv::sim
