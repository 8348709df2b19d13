#include "etv/validate.hpp"

#include <cstdint>
#include <map>
#include <string>

#include "etv/maxflow.hpp"

namespace etv {

namespace {

std::string str(std::size_t v) { return std::to_string(v); }

}  // namespace

bool is_feasible(const Instance& instance) {
  const std::size_t n = instance.num_users();
  std::int64_t total_demand = 0;
  for (const auto& fund : instance.funds) total_demand += fund.demand;
  if (total_demand != static_cast<std::int64_t>(n)) return false;

  // Users with equal tolerance are interchangeable, so collapse them into
  // one node per tolerance level.
  std::map<int, std::int64_t> users_per_level;
  for (const auto& user : instance.users) ++users_per_level[user.risk_tolerance];

  const int num_levels = static_cast<int>(users_per_level.size());
  const int num_funds = static_cast<int>(instance.num_funds());
  const int source = 0;
  const int sink = 1;
  const int first_level = 2;
  const int first_fund = first_level + num_levels;
  MaxFlow flow(first_fund + num_funds);

  int level_node = first_level;
  for (const auto& [tolerance, count] : users_per_level) {
    flow.add_edge(source, level_node, count);
    for (int j = 0; j < num_funds; ++j) {
      if (tolerance >= instance.funds[j].risk_level) flow.add_edge(level_node, first_fund + j, count);
    }
    ++level_node;
  }
  for (int j = 0; j < num_funds; ++j) flow.add_edge(first_fund + j, sink, instance.funds[j].demand);

  return flow.solve(source, sink) == static_cast<std::int64_t>(n);
}

Violations validate_instance(const Instance& instance, int max_risk_level) {
  Violations out;
  const std::size_t n = instance.num_users();
  const std::size_t k = instance.num_funds();

  for (std::size_t i = 0; i < n; ++i) {
    const auto& user = instance.users[i];
    if (user.id != static_cast<int>(i)) {
      out.push_back({ErrorKind::ShapeError, "user at row " + str(i) + " has id " + std::to_string(user.id) +
                                                "; ids must be dense and in order"});
    }
    if (user.features.size() != instance.user_feature_dim) {
      out.push_back({ErrorKind::ShapeError, "user " + str(i) + " has " + str(user.features.size()) +
                                                " features, expected " + str(instance.user_feature_dim)});
    }
    if (user.risk_tolerance < 0 || user.risk_tolerance > max_risk_level) {
      out.push_back({ErrorKind::ShapeError, "user " + str(i) + " risk tolerance " +
                                                std::to_string(user.risk_tolerance) + " outside [0, " +
                                                std::to_string(max_risk_level) + "]"});
    }
  }

  std::int64_t total_demand = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const auto& fund = instance.funds[j];
    if (fund.id != static_cast<int>(j)) {
      out.push_back({ErrorKind::ShapeError, "fund at row " + str(j) + " has id " + std::to_string(fund.id) +
                                                "; ids must be dense and in order"});
    }
    if (fund.features.size() != instance.fund_feature_dim) {
      out.push_back({ErrorKind::ShapeError, "fund " + str(j) + " has " + str(fund.features.size()) +
                                                " features, expected " + str(instance.fund_feature_dim)});
    }
    if (fund.risk_level < 0 || fund.risk_level > max_risk_level) {
      out.push_back({ErrorKind::ShapeError, "fund " + str(j) + " risk level " + std::to_string(fund.risk_level) +
                                                " outside [0, " + std::to_string(max_risk_level) + "]"});
    }
    if (fund.demand < 0) {
      out.push_back({ErrorKind::ShapeError, "fund " + str(j) + " has negative demand"});
    }
    total_demand += fund.demand;
  }
  if (k == 0 && n > 0) out.push_back({ErrorKind::ShapeError, "instance has users but no funds"});

  if (total_demand != static_cast<std::int64_t>(n)) {
    out.push_back({ErrorKind::DemandMismatch,
                   "sum of demands is " + std::to_string(total_demand) + " but there are " + str(n) + " users"});
  }

  if (out.empty() && !is_feasible(instance)) {
    out.push_back({ErrorKind::Infeasible, "no assignment meets every demand under the risk constraints"});
  }
  return out;
}

Violations validate_plan(const Instance& instance, const AllocationPlan& plan) {
  Violations out;
  const std::size_t n = instance.num_users();
  const std::size_t k = instance.num_funds();
  if (plan.assignment.size() != n) {
    out.push_back({ErrorKind::ShapeError, "plan covers " + str(plan.assignment.size()) + " users, instance has " +
                                              str(n)});
    return out;
  }

  std::vector<std::int64_t> counts(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int j = plan.assignment[i];
    if (j < 0 || static_cast<std::size_t>(j) >= k) {
      out.push_back({ErrorKind::ShapeError, "user " + str(i) + " assigned to unknown fund " + std::to_string(j)});
      continue;
    }
    ++counts[j];
    if (!instance.eligible(i, j)) {
      out.push_back({ErrorKind::RiskViolation, "user " + str(i) + " (tolerance " +
                                                   std::to_string(instance.users[i].risk_tolerance) +
                                                   ") assigned to fund " + std::to_string(j) + " (risk level " +
                                                   std::to_string(instance.funds[j].risk_level) + ")"});
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] != instance.funds[j].demand) {
      out.push_back({ErrorKind::DemandViolation, "fund " + str(j) + " received " + std::to_string(counts[j]) +
                                                     " users, demand is " + std::to_string(instance.funds[j].demand)});
    }
  }
  return out;
}

void throw_if_any(const Violations& violations) {
  if (!violations.empty()) throw Error(violations.front().kind, violations.front().message);
}

double objective(const EtvMatrix& etv, const AllocationPlan& plan) {
  if (plan.assignment.size() != etv.rows()) {
    throw Error(ErrorKind::ShapeError, "plan covers " + str(plan.assignment.size()) + " users, etv has " +
                                           str(etv.rows()) + " rows");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < etv.rows(); ++i) {
    const int j = plan.assignment[i];
    if (j < 0 || static_cast<std::size_t>(j) >= etv.cols()) {
      throw Error(ErrorKind::ShapeError, "user " + str(i) + " assigned to unknown fund " + std::to_string(j));
    }
    total += etv(i, j);
  }
  return total;
}

}  // namespace etv
