#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "etv/error.hpp"
#include "etv/seed.hpp"

namespace etv::cli {

// Parsed command line. Unused fields are ignored by subcommands that do not
// read them.
struct CliConfig {
  std::string subcommand;
  std::filesystem::path instance;  // directory holding users.csv and funds.csv
  std::filesystem::path obs;
  std::filesystem::path model;
  std::filesystem::path etv;
  std::filesystem::path plan;
  std::filesystem::path report;
  std::filesystem::path config;  // JSON overrides, experiment-config layout
  std::string strategy = "ha";
  std::string loss = "esj";
  std::string role = "train";     // gen-data
  std::string priority;           // allocate --strategy manual: "auto" or "3,1,0,2"
  std::string source = "etv";     // evaluate: label for the report row
  // Root seed; falls back to the config file, then to kDefaultSeed.
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> num_users;
  std::optional<std::size_t> num_funds;
  std::vector<std::size_t> sizes;            // bench ladder
  std::optional<std::size_t> exact_cutoff;   // bench
  bool append = false;          // evaluate: add a row to an existing report
  bool emit_plot_data = false;  // experiment, bench
  bool record_timing = false;   // experiment
};

// 0 on success, 1 validation / config / IO errors, 2 infeasible instances,
// 3 numeric failures.
int exit_code(ErrorKind kind);

void cmd_gen_data(const CliConfig& config);
void cmd_train(const CliConfig& config);
void cmd_predict(const CliConfig& config);
void cmd_allocate(const CliConfig& config);
void cmd_evaluate(const CliConfig& config);
void cmd_bench(const CliConfig& config);
void cmd_experiment(const CliConfig& config);

// Parses argv, dispatches, and maps errors to exit codes; the error message
// goes to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace etv::cli
