#pragma once

#include "etv/model/esj_model.hpp"
#include "etv/types.hpp"

namespace etv::model {

// p * (exp(mu + sigma^2 / 2) - 1), clamped below at 0.
double expected_transaction_value(double p, double mu, double sigma);

// ETV for every user-fund pair. Models trained with CE_MSE have no
// trained scale head, so their sigma is taken as 0. Rows are evaluated
// in parallel (ETVALLOC_THREADS caps the worker count).
EtvMatrix predict_etv(const EsjModel& model, const Instance& instance, LossKind trained_with = LossKind::ESJ);

}  // namespace etv::model
