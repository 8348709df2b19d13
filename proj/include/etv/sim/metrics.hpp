#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "etv/types.hpp"

namespace etv::sim {

// Realized (converted, amount) for every user-fund pair.
class OutcomeGrid {
 public:
  // Throws ShapeError unless `observations` covers each of the N x K pairs
  // exactly once (in any order).
  OutcomeGrid(std::size_t num_users, std::size_t num_funds, std::span<const Observation> observations);

  std::size_t num_users() const { return n_; }
  std::size_t num_funds() const { return k_; }
  const Observation& at(std::size_t user, std::size_t fund) const { return cells_[user * k_ + fund]; }

 private:
  std::size_t n_;
  std::size_t k_;
  std::vector<Observation> cells_;
};

struct HitMetrics {
  std::int64_t thc = 0;  // total hit conversions
  double tha = 0.0;      // total hit amount
};

// Every user goes to argmax_j etv(i, j) (ties to the lower fund id), with no
// demand or risk constraint; THC and THA sum the realized outcomes there.
HitMetrics metrics_thc_tha(const EtvMatrix& etv, const OutcomeGrid& outcomes);

// Argmax grouping used by metrics_thc_tha.
std::vector<int> argmax_assignment(const EtvMatrix& etv);

struct DeliveryMetrics {
  double cpmd = 0.0;   // conversions per thousand deliveries
  double tapmd = 0.0;  // transaction amount per thousand deliveries
};

// Throws EmptyDeliveries for an empty span.
DeliveryMetrics metrics_delivery(std::span<const Observation> delivered);
DeliveryMetrics metrics_delivery(const AllocationPlan& plan, const OutcomeGrid& outcomes);

// Area under the ROC curve with tied scores counted as half. Labels are 0
// or 1 (nonzero counts as positive). Returns 0.5 when one class is absent.
double auc(std::span<const double> scores, std::span<const int> labels);

// Mean over all pairs of (log(1 + etv) - v)^2, where v = log(1 + amount):
// ETV error measured on the log-label scale over the entire sample space.
double log_etv_mse(const EtvMatrix& etv, const OutcomeGrid& outcomes);

// One row of an experiment or evaluation report.
struct MetricsReport {
  std::string source;    // esj, ziln, ce_mse, truth, or a user label
  std::string strategy;  // allocation strategy
  std::uint64_t seed = 0;
  std::int64_t thc = 0;
  double tha = 0.0;
  double cpmd = 0.0;
  double tapmd = 0.0;
  double objective = 0.0;
  double objective_ratio = 0.0;  // objective / exact objective on the same ETV
  std::int64_t runtime_ms = 0;
};

// THC/THA from the argmax grouping of `etv`, CPMD/TAPMD from the plan's
// deliveries, and objective(etv, plan). objective_ratio is the objective
// over `exact_objective` (1 when both are 0; 0 when no exact objective is
// given, i.e. exact_objective < 0).
MetricsReport evaluate_plan(const EtvMatrix& etv, const AllocationPlan& plan, const OutcomeGrid& outcomes,
                            double exact_objective = -1.0);

// Reports are deterministic for a given config unless `include_runtime`
// adds the wall-clock column.
void write_reports_csv(const std::filesystem::path& path, std::span<const MetricsReport> rows, bool include_runtime);
std::vector<MetricsReport> read_reports_csv(const std::filesystem::path& path);
nlohmann::json reports_to_json(std::span<const MetricsReport> rows, bool include_runtime);
void write_reports_json(const std::filesystem::path& path, std::span<const MetricsReport> rows, bool include_runtime);

}  // namespace etv::sim
