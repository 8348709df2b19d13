#include "etv/model/predict.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <vector>

#include "etv/error.hpp"
#include "etv/parallel.hpp"

namespace etv::model {

double expected_transaction_value(double p, double mu, double sigma) {
  return std::max(0.0, p * std::expm1(mu + 0.5 * sigma * sigma));
}

EtvMatrix predict_etv(const EsjModel& model, const Instance& instance, LossKind trained_with) {
  const auto& arch = model.architecture();
  if (arch.user_dim != instance.user_feature_dim || arch.fund_dim != instance.fund_feature_dim) {
    throw Error(ErrorKind::ShapeError, "model feature dimensions do not match the instance");
  }
  const std::size_t n = instance.num_users();
  const std::size_t k = instance.num_funds();
  for (const auto& user : instance.users) {
    if (user.features.size() != arch.user_dim) throw Error(ErrorKind::ShapeError, "user feature length mismatch");
  }
  for (const auto& fund : instance.funds) {
    if (fund.features.size() != arch.fund_dim) throw Error(ErrorKind::ShapeError, "fund feature length mismatch");
  }
  const bool use_sigma = trained_with != LossKind::CE_MSE;
  std::vector<double> values(n * k);
  std::atomic<bool> finite{true};

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<double> input(arch.input_dim());
    EsjModel::Trace trace;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& user = instance.users[i].features;
      std::copy(user.begin(), user.end(), input.begin());
      for (std::size_t j = 0; j < k; ++j) {
        const auto& fund = instance.funds[j].features;
        std::copy(fund.begin(), fund.end(), input.begin() + static_cast<std::ptrdiff_t>(arch.user_dim));
        model.forward(input, trace);
        const HeadOutput& out = trace.out;
        const double etv = expected_transaction_value(out.p, out.mu, use_sigma ? out.sigma : 0.0);
        if (!std::isfinite(etv)) finite = false;
        values[i * k + j] = etv;
      }
    }
  });

  if (!finite) throw Error(ErrorKind::Diverged, "model produced a non-finite expected transaction value");
  return EtvMatrix(n, k, std::move(values));
}

}  // namespace etv::model
