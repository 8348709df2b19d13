#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "etv/error.hpp"

namespace etv {

inline constexpr int kDefaultMaxRiskLevel = 5;

struct UserRecord {
  int id = 0;
  std::vector<double> features;
  int risk_tolerance = 0;
};

struct FundType {
  int id = 0;
  std::vector<double> features;
  int risk_level = 0;
  int demand = 0;
};

// The allocation problem: N users, K fund types. Users may only receive
// funds whose risk level does not exceed their tolerance, and fund j must
// receive exactly funds[j].demand users.
struct Instance {
  std::vector<UserRecord> users;
  std::vector<FundType> funds;
  std::size_t user_feature_dim = 0;
  std::size_t fund_feature_dim = 0;

  std::size_t num_users() const { return users.size(); }
  std::size_t num_funds() const { return funds.size(); }

  bool eligible(std::size_t user, std::size_t fund) const {
    return users[user].risk_tolerance >= funds[fund].risk_level;
  }
};

// Dense row-major N x K matrix of nonnegative expected transaction values.
class EtvMatrix {
 public:
  EtvMatrix() = default;
  EtvMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

  // Throws ShapeError if values.size() != rows * cols, or if any entry is
  // negative or non-finite.
  EtvMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

  // Entries must stay finite and >= 0; set() enforces it.
  void set(std::size_t i, std::size_t j, double value);

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> values() const { return values_; }

  EtvMatrix scaled(double factor) const;

  friend bool operator==(const EtvMatrix&, const EtvMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// One fund index per user.
struct AllocationPlan {
  std::vector<int> assignment;

  friend bool operator==(const AllocationPlan&, const AllocationPlan&) = default;
};

// A logged (or simulated) delivery outcome for one user-fund pair.
struct Observation {
  int user_id = 0;
  int fund_id = 0;
  bool converted = false;
  double amount = 0.0;

  // v = log(PA + 1); zero for non-converted samples.
  double log_label() const { return converted ? std::log1p(amount) : 0.0; }
  // y_v = PA + 1.
  double shifted_amount() const { return amount + 1.0; }

  friend bool operator==(const Observation&, const Observation&) = default;
};

// Throws ShapeError unless converted <=> amount > 0.
void check_observation(const Observation& obs);

}  // namespace etv
