#include "etv/sim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "etv/csv.hpp"
#include "etv/error.hpp"
#include "etv/validate.hpp"

namespace etv::sim {

using nlohmann::json;

OutcomeGrid::OutcomeGrid(std::size_t num_users, std::size_t num_funds, std::span<const Observation> observations)
    : n_(num_users), k_(num_funds), cells_(num_users * num_funds) {
  if (observations.size() != cells_.size()) {
    throw Error(ErrorKind::ShapeError, "outcome grid needs " + std::to_string(cells_.size()) + " observations, got " +
                                           std::to_string(observations.size()));
  }
  std::vector<bool> seen(cells_.size(), false);
  for (const Observation& obs : observations) {
    if (obs.user_id < 0 || static_cast<std::size_t>(obs.user_id) >= n_ || obs.fund_id < 0 ||
        static_cast<std::size_t>(obs.fund_id) >= k_) {
      throw Error(ErrorKind::ShapeError, "outcome for unknown pair (" + std::to_string(obs.user_id) + ", " +
                                             std::to_string(obs.fund_id) + ")");
    }
    check_observation(obs);
    const std::size_t cell = static_cast<std::size_t>(obs.user_id) * k_ + static_cast<std::size_t>(obs.fund_id);
    if (seen[cell]) {
      throw Error(ErrorKind::ShapeError, "duplicate outcome for pair (" + std::to_string(obs.user_id) + ", " +
                                             std::to_string(obs.fund_id) + ")");
    }
    seen[cell] = true;
    cells_[cell] = obs;
  }
}

std::vector<int> argmax_assignment(const EtvMatrix& etv) {
  std::vector<int> out(etv.rows(), 0);
  for (std::size_t i = 0; i < etv.rows(); ++i) {
    const auto row = etv.row(i);
    out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

HitMetrics metrics_thc_tha(const EtvMatrix& etv, const OutcomeGrid& outcomes) {
  if (etv.rows() != outcomes.num_users() || etv.cols() != outcomes.num_funds()) {
    throw Error(ErrorKind::ShapeError, "etv and outcome grid shapes differ");
  }
  HitMetrics m;
  const auto groups = argmax_assignment(etv);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const Observation& obs = outcomes.at(i, groups[i]);
    m.thc += obs.converted ? 1 : 0;
    m.tha += obs.amount;
  }
  return m;
}

DeliveryMetrics metrics_delivery(std::span<const Observation> delivered) {
  if (delivered.empty()) throw Error(ErrorKind::EmptyDeliveries, "no deliveries to evaluate");
  double conversions = 0.0;
  double amount = 0.0;
  for (const Observation& obs : delivered) {
    conversions += obs.converted ? 1.0 : 0.0;
    amount += obs.amount;
  }
  const double per_mille = 1000.0 / static_cast<double>(delivered.size());
  return {conversions * per_mille, amount * per_mille};
}

DeliveryMetrics metrics_delivery(const AllocationPlan& plan, const OutcomeGrid& outcomes) {
  if (plan.assignment.size() != outcomes.num_users()) {
    throw Error(ErrorKind::ShapeError, "plan and outcome grid cover different users");
  }
  std::vector<Observation> delivered;
  delivered.reserve(plan.assignment.size());
  for (std::size_t i = 0; i < plan.assignment.size(); ++i) {
    const int j = plan.assignment[i];
    if (j < 0 || static_cast<std::size_t>(j) >= outcomes.num_funds()) {
      throw Error(ErrorKind::ShapeError, "plan assigns user " + std::to_string(i) + " to unknown fund");
    }
    delivered.push_back(outcomes.at(i, j));
  }
  return metrics_delivery(delivered);
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorKind::ShapeError, "auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney with average ranks for ties.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) ++end;
    const double rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t r = start; r < end; ++r) {
      if (labels[order[r]] != 0) {
        positive_rank_sum += rank;
        ++positives;
      }
    }
    start = end;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) return 0.5;
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

double log_etv_mse(const EtvMatrix& etv, const OutcomeGrid& outcomes) {
  if (etv.rows() != outcomes.num_users() || etv.cols() != outcomes.num_funds()) {
    throw Error(ErrorKind::ShapeError, "etv and outcome grid shapes differ");
  }
  if (etv.rows() * etv.cols() == 0) throw Error(ErrorKind::EmptyData, "empty grid");
  double total = 0.0;
  for (std::size_t i = 0; i < etv.rows(); ++i) {
    for (std::size_t j = 0; j < etv.cols(); ++j) {
      const double diff = std::log1p(etv(i, j)) - outcomes.at(i, j).log_label();
      total += diff * diff;
    }
  }
  return total / static_cast<double>(etv.rows() * etv.cols());
}

MetricsReport evaluate_plan(const EtvMatrix& etv, const AllocationPlan& plan, const OutcomeGrid& outcomes,
                            double exact_objective) {
  MetricsReport r;
  const HitMetrics hits = metrics_thc_tha(etv, outcomes);
  const DeliveryMetrics delivery = metrics_delivery(plan, outcomes);
  r.thc = hits.thc;
  r.tha = hits.tha;
  r.cpmd = delivery.cpmd;
  r.tapmd = delivery.tapmd;
  r.objective = objective(etv, plan);
  if (exact_objective > 0.0) {
    r.objective_ratio = r.objective / exact_objective;
  } else if (exact_objective == 0.0) {
    r.objective_ratio = r.objective == 0.0 ? 1.0 : 0.0;
  }
  return r;
}

namespace {

std::vector<std::string> report_header(bool include_runtime) {
  std::vector<std::string> h{"source", "strategy", "seed", "thc", "tha", "cpmd", "tapmd", "objective",
                             "objective_ratio"};
  if (include_runtime) h.push_back("runtime_ms");
  return h;
}

}  // namespace

void write_reports_csv(const std::filesystem::path& path, std::span<const MetricsReport> rows, bool include_runtime) {
  csv::Table table;
  table.header = report_header(include_runtime);
  for (const auto& r : rows) {
    std::vector<std::string> row{r.source,
                                 r.strategy,
                                 std::to_string(r.seed),
                                 std::to_string(r.thc),
                                 csv::format_double(r.tha),
                                 csv::format_double(r.cpmd),
                                 csv::format_double(r.tapmd),
                                 csv::format_double(r.objective),
                                 csv::format_double(r.objective_ratio)};
    if (include_runtime) row.push_back(std::to_string(r.runtime_ms));
    table.rows.push_back(std::move(row));
  }
  csv::write_table(path, table);
}

std::vector<MetricsReport> read_reports_csv(const std::filesystem::path& path) {
  const csv::Table table = csv::read_table(path);
  const bool has_runtime = table.header == report_header(true);
  if (!has_runtime && table.header != report_header(false)) {
    throw Error(ErrorKind::ShapeError, path.string() + ": not a metrics report");
  }
  std::vector<MetricsReport> out;
  const std::string ctx = path.string();
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw Error(ErrorKind::ShapeError, ctx + ": ragged row");
    MetricsReport r;
    r.source = row[0];
    r.strategy = row[1];
    r.seed = static_cast<std::uint64_t>(std::stoull(row[2]));
    r.thc = csv::parse_int(row[3], ctx);
    r.tha = csv::parse_double(row[4], ctx);
    r.cpmd = csv::parse_double(row[5], ctx);
    r.tapmd = csv::parse_double(row[6], ctx);
    r.objective = csv::parse_double(row[7], ctx);
    r.objective_ratio = csv::parse_double(row[8], ctx);
    if (has_runtime) r.runtime_ms = csv::parse_int(row[9], ctx);
    out.push_back(std::move(r));
  }
  return out;
}

json reports_to_json(std::span<const MetricsReport> rows, bool include_runtime) {
  json out = json::array();
  for (const auto& r : rows) {
    json j{{"source", r.source},       {"strategy", r.strategy}, {"seed", r.seed},
           {"thc", r.thc},             {"tha", r.tha},           {"cpmd", r.cpmd},
           {"tapmd", r.tapmd},         {"objective", r.objective}, {"objective_ratio", r.objective_ratio}};
    if (include_runtime) j["runtime_ms"] = r.runtime_ms;
    out.push_back(std::move(j));
  }
  return out;
}

void write_reports_json(const std::filesystem::path& path, std::span<const MetricsReport> rows, bool include_runtime) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << reports_to_json(rows, include_runtime).dump(2) << '\n';
}

}  // namespace etv::sim
