#include "etv/types.hpp"

#include <string>

namespace etv {

namespace {

void check_entry(double value, std::size_t index) {
  if (!std::isfinite(value) || value < 0.0) {
    throw Error(ErrorKind::ShapeError,
                "etv entry " + std::to_string(index) + " is " + std::to_string(value) + ", must be finite and >= 0");
  }
}

}  // namespace

EtvMatrix::EtvMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw Error(ErrorKind::ShapeError, "etv matrix has " + std::to_string(values_.size()) + " values, expected " +
                                           std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) check_entry(values_[k], k);
}

void EtvMatrix::set(std::size_t i, std::size_t j, double value) {
  check_entry(value, i * cols_ + j);
  values_[i * cols_ + j] = value;
}

EtvMatrix EtvMatrix::scaled(double factor) const {
  std::vector<double> out(values_);
  for (double& v : out) v *= factor;
  return EtvMatrix(rows_, cols_, std::move(out));
}

void check_observation(const Observation& obs) {
  if (!std::isfinite(obs.amount) || obs.amount < 0.0) {
    throw Error(ErrorKind::ShapeError, "observation amount must be finite and >= 0");
  }
  if (obs.converted != (obs.amount > 0.0)) {
    throw Error(ErrorKind::ShapeError, "observation (user " + std::to_string(obs.user_id) + ", fund " +
                                           std::to_string(obs.fund_id) + "): converted flag disagrees with amount");
  }
}

}  // namespace etv
