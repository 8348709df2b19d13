#include "etv/sim/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <optional>

#include "etv/csv.hpp"
#include "etv/error.hpp"
#include "etv/model/checkpoint.hpp"
#include "etv/model/predict.hpp"
#include "etv/validate.hpp"

namespace etv::sim {

using nlohmann::json;

void ExperimentConfig::validate() const {
  generator.validate();
  train.validate();
  if (losses.empty() && !include_truth) throw Error(ErrorKind::ConfigError, "experiment needs a loss or the truth");
}

namespace {

struct Source {
  std::string name;
  EtvMatrix etv;
};

SourceSummary summarize(const std::string& name, std::uint64_t seed, const EtvMatrix& etv, const OutcomeGrid& grid) {
  SourceSummary s;
  s.source = name;
  s.seed = seed;
  const HitMetrics hits = metrics_thc_tha(etv, grid);
  s.thc = hits.thc;
  s.tha = hits.tha;
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(etv.rows() * etv.cols());
  for (std::size_t i = 0; i < etv.rows(); ++i) {
    for (std::size_t j = 0; j < etv.cols(); ++j) {
      scores.push_back(etv(i, j));
      labels.push_back(grid.at(i, j).converted ? 1 : 0);
    }
  }
  s.auc = auc(scores, labels);
  s.log_mse = log_etv_mse(etv, grid);
  return s;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  GeneratorConfig gen = config.generator;
  gen.seed = config.seed;
  model::TrainConfig train_config = config.train;
  train_config.seed = config.seed;

  const Dataset train_data = generate(gen, Role::Train);
  const Dataset test_data = generate(gen, Role::Test);
  const Instance& test = test_data.instance;
  const OutcomeGrid grid(test.num_users(), test.num_funds(), test_data.outcomes);

  std::vector<Source> sources;
  if (config.include_truth) sources.push_back({"truth", true_etv(test_data.truth, test, gen.outcome_model)});
  for (model::LossKind kind : config.losses) {
    train_config.loss_kind = kind;
    const model::TrainResult trained = model::train(train_data.instance, train_data.outcomes, train_config);
    sources.push_back({std::string(model::to_string(kind)), model::predict_etv(trained.model, test, kind)});
  }

  ExperimentResult result;
  for (const Source& source : sources) {
    result.summaries.push_back(summarize(source.name, config.seed, source.etv, grid));

    std::optional<double> exact_objective;
    std::vector<std::pair<alloc::Strategy, AllocationPlan>> plans;
    std::vector<std::int64_t> runtimes;
    for (alloc::Strategy strategy : config.strategies) {
      const auto start = std::chrono::steady_clock::now();
      AllocationPlan plan = alloc::allocate(strategy, test, source.etv, config.manual_priority);
      const auto stop = std::chrono::steady_clock::now();
      runtimes.push_back(std::chrono::duration_cast<std::chrono::milliseconds>(stop - start).count());
      if (strategy == alloc::Strategy::Exact) exact_objective = objective(source.etv, plan);
      plans.emplace_back(strategy, std::move(plan));
    }
    if (!exact_objective && !plans.empty()) {
      exact_objective = objective(source.etv, alloc::allocate_exact(test, source.etv));
    }
    for (std::size_t s = 0; s < plans.size(); ++s) {
      MetricsReport r = evaluate_plan(source.etv, plans[s].second, grid, *exact_objective);
      r.source = source.name;
      r.strategy = std::string(alloc::to_string(plans[s].first));
      r.seed = config.seed;
      if (config.record_timing) r.runtime_ms = runtimes[s];
      result.reports.push_back(std::move(r));
    }
  }
  return result;
}

json to_json(const ExperimentConfig& config) {
  json strategies = json::array();
  for (auto s : config.strategies) strategies.push_back(std::string(alloc::to_string(s)));
  json losses = json::array();
  for (auto k : config.losses) losses.push_back(std::string(model::to_string(k)));
  return json{{"generator", to_json(config.generator)},
              {"train", model::to_json(config.train)},
              {"strategies", strategies},
              {"losses", losses},
              {"include_truth", config.include_truth},
              {"manual_priority", config.manual_priority},
              {"record_timing", config.record_timing},
              {"seed", config.seed}};
}

ExperimentConfig experiment_config_from_json(const json& j, ExperimentConfig base) {
  static const std::vector<std::string> known{"generator",       "train",         "strategies", "losses",
                                              "include_truth",   "manual_priority", "record_timing", "seed"};
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "experiment config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorKind::ConfigError, "unknown experiment config key '" + key + "'");
    }
  }
  if (j.contains("generator")) base.generator = generator_config_from_json(j.at("generator"), base.generator);
  if (j.contains("train")) base.train = model::train_config_from_json(j.at("train"), base.train);
  try {
    if (j.contains("strategies")) {
      base.strategies.clear();
      for (const auto& s : j.at("strategies")) base.strategies.push_back(alloc::parse_strategy(s.get<std::string>()));
    }
    if (j.contains("losses")) {
      base.losses.clear();
      for (const auto& s : j.at("losses")) base.losses.push_back(model::parse_loss_kind(s.get<std::string>()));
    }
    if (j.contains("include_truth")) base.include_truth = j.at("include_truth").get<bool>();
    if (j.contains("manual_priority")) base.manual_priority = j.at("manual_priority").get<std::vector<int>>();
    if (j.contains("record_timing")) base.record_timing = j.at("record_timing").get<bool>();
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("experiment config: ") + e.what());
  }
  base.validate();
  return base;
}

void write_summaries_csv(const std::filesystem::path& path, std::span<const SourceSummary> rows) {
  csv::Table table;
  table.header = {"source", "seed", "thc", "tha", "auc", "log_mse"};
  for (const auto& s : rows) {
    table.rows.push_back({s.source, std::to_string(s.seed), std::to_string(s.thc), csv::format_double(s.tha),
                          csv::format_double(s.auc), csv::format_double(s.log_mse)});
  }
  csv::write_table(path, table);
}

}  // namespace etv::sim
