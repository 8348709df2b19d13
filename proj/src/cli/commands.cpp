#include "etv/cli/commands.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "etv/alloc/strategies.hpp"
#include "etv/csv.hpp"
#include "etv/model/checkpoint.hpp"
#include "etv/model/predict.hpp"
#include "etv/sim/bench.hpp"
#include "etv/sim/experiment.hpp"
#include "etv/validate.hpp"

namespace etv::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Infeasible:
      return 2;
    case ErrorKind::NonFiniteLoss:
    case ErrorKind::Diverged:
      return 3;
    default:
      return 1;
  }
}

namespace {

void require_path(const fs::path& path, const char* flag) {
  if (path.empty()) throw Error(ErrorKind::ConfigError, std::string("missing ") + flag);
}

void require_input(const fs::path& path, const char* flag) {
  require_path(path, flag);
  if (!fs::exists(path)) throw Error(ErrorKind::IoError, std::string(flag) + " " + path.string() + " does not exist");
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

sim::ExperimentConfig load_config(const CliConfig& cli) {
  sim::ExperimentConfig config;
  if (!cli.config.empty()) {
    require_input(cli.config, "--config");
    config = sim::experiment_config_from_json(read_json(cli.config));
  }
  if (cli.seed) config.seed = *cli.seed;
  if (cli.num_users) config.generator.num_users = *cli.num_users;
  if (cli.num_funds) config.generator.num_funds = *cli.num_funds;
  config.generator.seed = config.seed;
  config.train.seed = config.seed;
  config.validate();
  return config;
}

fs::path observations_path(const CliConfig& cli) {
  return cli.obs.empty() ? cli.instance / "observations.csv" : cli.obs;
}

std::vector<int> parse_priority(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw Error(ErrorKind::ConfigError, "bad --priority entry '" + field + "'");
    }
    out.push_back(value);
  }
  return out;
}

bool is_json_path(const fs::path& path) { return path.extension() == ".json"; }

void write_reports(const fs::path& path, std::span<const sim::MetricsReport> rows, bool include_runtime) {
  if (is_json_path(path)) {
    sim::write_reports_json(path, rows, include_runtime);
  } else {
    sim::write_reports_csv(path, rows, include_runtime);
  }
}

fs::path plot_path(const fs::path& report, const char* name) {
  return report.has_parent_path() ? report.parent_path() / name : fs::path(name);
}

}  // namespace

void cmd_gen_data(const CliConfig& cli) {
  require_path(cli.instance, "--instance");
  const sim::ExperimentConfig config = load_config(cli);
  sim::Role role;
  if (cli.role == "train") {
    role = sim::Role::Train;
  } else if (cli.role == "test") {
    role = sim::Role::Test;
  } else {
    throw Error(ErrorKind::ConfigError, "--role must be train or test, got '" + cli.role + "'");
  }
  const sim::Dataset data = sim::generate(config.generator, role);
  csv::write_instance(cli.instance, data.instance);
  csv::write_observations(observations_path(cli), data.outcomes);
  write_json(cli.instance / "truth.json", json{{"role", cli.role},
                                               {"seed", config.seed},
                                               {"generator", sim::to_json(config.generator)},
                                               {"true_model", sim::to_json(data.truth)},
                                               {"popularity", data.popularity}});
}

void cmd_train(const CliConfig& cli) {
  require_input(cli.instance, "--instance");
  require_input(observations_path(cli), "--obs");
  require_path(cli.model, "--model");
  const sim::ExperimentConfig config = load_config(cli);
  model::TrainConfig train_config = config.train;
  train_config.loss_kind = model::parse_loss_kind(cli.loss);

  const Instance instance = csv::read_instance(cli.instance);
  const auto observations = csv::read_observations(observations_path(cli));
  const model::TrainResult result = model::train(instance, observations, train_config);

  model::save_checkpoint(cli.model,
                         {result.model, result.loss_kind, train_config.seed, model::to_json(train_config)});
  fs::path log = cli.report;
  if (log.empty()) log = fs::path(cli.model).replace_extension(".log.csv");
  model::write_training_log(log, result.log);
}

void cmd_predict(const CliConfig& cli) {
  require_input(cli.model, "--model");
  require_input(cli.instance, "--instance");
  require_path(cli.etv, "--etv");
  const model::Checkpoint checkpoint = model::load_checkpoint(cli.model);
  const Instance instance = csv::read_instance(cli.instance);
  csv::write_etv(cli.etv, model::predict_etv(checkpoint.model, instance, checkpoint.loss_kind));
}

void cmd_allocate(const CliConfig& cli) {
  require_input(cli.instance, "--instance");
  require_input(cli.etv, "--etv");
  require_path(cli.plan, "--plan");
  const alloc::Strategy strategy = alloc::parse_strategy(cli.strategy);
  const Instance instance = csv::read_instance(cli.instance);
  const EtvMatrix etv = csv::read_etv(cli.etv);

  std::vector<int> priority;
  if (strategy == alloc::Strategy::Manual) {
    if (cli.priority.empty()) throw Error(ErrorKind::ConfigError, "manual strategy needs --priority (list or auto)");
    if (cli.priority != "auto") priority = parse_priority(cli.priority);
  }
  const AllocationPlan plan = alloc::allocate(strategy, instance, etv, priority);
  throw_if_any(validate_plan(instance, plan));
  csv::write_plan(cli.plan, plan);
}

void cmd_evaluate(const CliConfig& cli) {
  require_input(cli.instance, "--instance");
  require_input(cli.etv, "--etv");
  require_input(cli.plan, "--plan");
  require_input(observations_path(cli), "--obs");
  require_path(cli.report, "--report");
  const Instance instance = csv::read_instance(cli.instance);
  const EtvMatrix etv = csv::read_etv(cli.etv);
  const AllocationPlan plan = csv::read_plan(cli.plan);
  const auto observations = csv::read_observations(observations_path(cli));
  throw_if_any(validate_plan(instance, plan));

  const sim::OutcomeGrid grid(instance.num_users(), instance.num_funds(), observations);
  const double exact = objective(etv, alloc::allocate_exact(instance, etv));
  sim::MetricsReport row = sim::evaluate_plan(etv, plan, grid, exact);
  row.source = cli.source;
  row.strategy = std::string(alloc::to_string(alloc::parse_strategy(cli.strategy)));
  row.seed = cli.seed.value_or(kDefaultSeed);

  std::vector<sim::MetricsReport> rows;
  if (cli.append && fs::exists(cli.report)) {
    if (is_json_path(cli.report)) throw Error(ErrorKind::ConfigError, "--append needs a CSV report");
    rows = sim::read_reports_csv(cli.report);
  }
  rows.push_back(std::move(row));
  write_reports(cli.report, rows, false);
}

void cmd_bench(const CliConfig& cli) {
  require_path(cli.report, "--report");
  const sim::ExperimentConfig config = load_config(cli);
  sim::BenchConfig bench;
  bench.generator = config.generator;
  bench.seed = config.seed;
  if (!cli.sizes.empty()) bench.sizes = cli.sizes;
  if (cli.exact_cutoff) bench.exact_cutoff = *cli.exact_cutoff;
  const auto rows = sim::run_bench(bench);
  sim::write_bench_csv(cli.report, rows);
  if (cli.emit_plot_data) sim::write_bench_plot_csv(plot_path(cli.report, "bench_plot.csv"), rows);
}

void cmd_experiment(const CliConfig& cli) {
  require_path(cli.report, "--report");
  sim::ExperimentConfig config = load_config(cli);
  if (cli.record_timing) config.record_timing = true;
  const sim::ExperimentResult result = sim::run_experiment(config);
  write_reports(cli.report, result.reports, config.record_timing);
  if (cli.emit_plot_data) sim::write_summaries_csv(plot_path(cli.report, "source_summary.csv"), result.summaries);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ETV prediction and constrained fund allocation"};
  app.require_subcommand(1);
  CliConfig cli;
  std::uint64_t seed = kDefaultSeed;
  std::size_t num_users = 0;
  std::size_t num_funds = 0;
  std::size_t exact_cutoff = 0;

  auto add_seed = [&](CLI::App* sub) { return sub->add_option("--seed", seed, "root seed"); };
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", cli.config, "JSON overrides (generator, train, ...)");
  };

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic instance with counterfactual outcomes");
  gen->add_option("--instance", cli.instance, "output directory")->required();
  gen->add_option("--obs", cli.obs, "observations path (default <instance>/observations.csv)");
  gen->add_option("--role", cli.role, "train or test");
  auto* gen_users = gen->add_option("--num-users", num_users, "N");
  auto* gen_funds = gen->add_option("--num-funds", num_funds, "K");
  auto* gen_seed = add_seed(gen);
  add_config(gen);

  auto* train = app.add_subcommand("train", "fit a model and write a checkpoint");
  train->add_option("--instance", cli.instance)->required();
  train->add_option("--obs", cli.obs);
  train->add_option("--model", cli.model, "checkpoint output")->required();
  train->add_option("--loss", cli.loss, "esj, ziln or ce_mse");
  train->add_option("--report", cli.report, "training log (default <model>.log.csv)");
  auto* train_seed = add_seed(train);
  add_config(train);

  auto* predict = app.add_subcommand("predict", "write the ETV matrix for an instance");
  predict->add_option("--model", cli.model)->required();
  predict->add_option("--instance", cli.instance)->required();
  predict->add_option("--etv", cli.etv, "output")->required();

  auto* allocate = app.add_subcommand("allocate", "assign users to funds");
  allocate->add_option("--instance", cli.instance)->required();
  allocate->add_option("--etv", cli.etv)->required();
  allocate->add_option("--plan", cli.plan, "output")->required();
  allocate->add_option("--strategy", cli.strategy, "ha, exact, manual or greedy");
  allocate->add_option("--priority", cli.priority, "manual fund order, comma separated, or auto");

  auto* evaluate = app.add_subcommand("evaluate", "score a plan against realized outcomes");
  evaluate->add_option("--instance", cli.instance)->required();
  evaluate->add_option("--etv", cli.etv)->required();
  evaluate->add_option("--plan", cli.plan)->required();
  evaluate->add_option("--obs", cli.obs);
  evaluate->add_option("--report", cli.report)->required();
  evaluate->add_option("--strategy", cli.strategy, "strategy that produced the plan");
  evaluate->add_option("--source", cli.source, "label for the ETV source");
  evaluate->add_flag("--append", cli.append, "append to an existing CSV report");
  auto* evaluate_seed = add_seed(evaluate);

  auto* bench = app.add_subcommand("bench", "time HA against exact over a size ladder");
  bench->add_option("--report", cli.report)->required();
  bench->add_option("--sizes", cli.sizes, "ladder of N")->delimiter(',');
  auto* bench_funds = bench->add_option("--num-funds", num_funds, "K");
  auto* bench_cutoff = bench->add_option("--exact-cutoff", exact_cutoff, "largest N for exact");
  bench->add_flag("--emit-plot-data", cli.emit_plot_data, "also write bench_plot.csv next to the report");
  auto* bench_seed = add_seed(bench);
  add_config(bench);

  auto* experiment = app.add_subcommand("experiment", "train every loss and compare strategies");
  experiment->add_option("--report", cli.report)->required();
  auto* experiment_users = experiment->add_option("--num-users", num_users, "N");
  auto* experiment_funds = experiment->add_option("--num-funds", num_funds, "K");
  experiment->add_flag("--emit-plot-data", cli.emit_plot_data, "also write source_summary.csv next to the report");
  experiment->add_flag("--record-timing", cli.record_timing, "add the runtime_ms column");
  auto* experiment_seed = add_seed(experiment);
  add_config(experiment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  for (auto* opt : {gen_seed, train_seed, evaluate_seed, bench_seed, experiment_seed}) {
    if (opt->count() > 0) cli.seed = seed;
  }
  for (auto* opt : {gen_users, experiment_users}) {
    if (opt->count() > 0) cli.num_users = num_users;
  }
  for (auto* opt : {gen_funds, bench_funds, experiment_funds}) {
    if (opt->count() > 0) cli.num_funds = num_funds;
  }
  if (bench_cutoff->count() > 0) cli.exact_cutoff = exact_cutoff;

  try {
    if (*gen) {
      cli.subcommand = "gen-data";
      cmd_gen_data(cli);
    } else if (*train) {
      cli.subcommand = "train";
      cmd_train(cli);
    } else if (*predict) {
      cli.subcommand = "predict";
      cmd_predict(cli);
    } else if (*allocate) {
      cli.subcommand = "allocate";
      cmd_allocate(cli);
    } else if (*evaluate) {
      cli.subcommand = "evaluate";
      cmd_evaluate(cli);
    } else if (*bench) {
      cli.subcommand = "bench";
      cmd_bench(cli);
    } else if (*experiment) {
      cli.subcommand = "experiment";
      cmd_experiment(cli);
    }
  } catch (const Error& e) {
    err << "etvalloc: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "etvalloc: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace etv::cli
