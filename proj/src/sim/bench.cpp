#include "etv/sim/bench.hpp"

#include <chrono>

#include "etv/alloc/strategies.hpp"
#include "etv/csv.hpp"
#include "etv/error.hpp"
#include "etv/validate.hpp"

namespace etv::sim {

void BenchConfig::validate() const {
  if (sizes.empty()) throw Error(ErrorKind::ConfigError, "bench needs at least one size");
  for (std::size_t n : sizes) {
    if (n == 0) throw Error(ErrorKind::ConfigError, "bench sizes must be positive");
  }
  generator.validate();
}

namespace {

template <typename F>
double time_ms(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchConfig& config) {
  config.validate();
  std::vector<BenchRow> rows;
  for (std::size_t n : config.sizes) {
    GeneratorConfig gen = config.generator;
    gen.num_users = n;
    gen.seed = config.seed;
    const Dataset data = generate(gen, Role::Test);
    const EtvMatrix etv = true_etv(data.truth, data.instance, gen.outcome_model);

    AllocationPlan ha;
    BenchRow ha_row{n, "ha", 0.0, 0.0, 0.0};
    ha_row.runtime_ms = time_ms([&] { ha = alloc::allocate_ha(data.instance, etv); });
    ha_row.objective = objective(etv, ha);

    if (n > config.exact_cutoff) {
      rows.push_back(ha_row);
      continue;
    }
    AllocationPlan exact;
    BenchRow exact_row{n, "exact", 0.0, 0.0, 1.0};
    exact_row.runtime_ms = time_ms([&] { exact = alloc::allocate_exact(data.instance, etv); });
    exact_row.objective = objective(etv, exact);
    ha_row.objective_ratio = exact_row.objective > 0.0 ? ha_row.objective / exact_row.objective : 1.0;
    rows.push_back(ha_row);
    rows.push_back(exact_row);
  }
  return rows;
}

void write_bench_csv(const std::filesystem::path& path, std::span<const BenchRow> rows) {
  csv::Table table;
  table.header = {"num_users", "strategy", "objective", "runtime_ms", "objective_ratio"};
  for (const auto& r : rows) {
    table.rows.push_back({std::to_string(r.num_users), r.strategy, csv::format_double(r.objective),
                          csv::format_double(r.runtime_ms), csv::format_double(r.objective_ratio)});
  }
  csv::write_table(path, table);
}

void write_bench_plot_csv(const std::filesystem::path& path, std::span<const BenchRow> rows) {
  csv::Table table;
  table.header = {"num_users",        "ha_objective",    "exact_objective", "ha_runtime_ms",
                  "exact_runtime_ms", "objective_ratio", "speedup"};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].strategy != "ha") continue;
    const BenchRow& ha = rows[k];
    BenchRow exact{ha.num_users, "exact", 0.0, 0.0, 0.0};
    if (k + 1 < rows.size() && rows[k + 1].strategy == "exact" && rows[k + 1].num_users == ha.num_users) {
      exact = rows[k + 1];
    }
    const double speedup = exact.runtime_ms > 0.0 && ha.runtime_ms > 0.0 ? exact.runtime_ms / ha.runtime_ms : 0.0;
    table.rows.push_back({std::to_string(ha.num_users), csv::format_double(ha.objective),
                          csv::format_double(exact.objective), csv::format_double(ha.runtime_ms),
                          csv::format_double(exact.runtime_ms), csv::format_double(ha.objective_ratio),
                          csv::format_double(speedup)});
  }
  csv::write_table(path, table);
}

}  // namespace etv::sim
