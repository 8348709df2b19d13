#pragma once

#include <span>

#include "etv/model/esj_model.hpp"
#include "etv/types.hpp"

namespace etv::model {

struct SampleLoss {
  double loss = 0.0;
  HeadGradient grad;
};

// Per-sample negative log-likelihood terms and their head gradients.
//
// ESJ, converted:      -log p + log(sqrt(2 pi) sigma y_v) + (v - mu)^2 / (2 sigma^2)
// ESJ, not converted:  -log(1 - p + p * exp(-mu^2 / (2 sigma^2)) / (sqrt(2 pi) sigma))
// ZILN:                cross-entropy on p, plus the lognormal term for converted samples only
// CE_MSE:              cross-entropy on p, plus (mu - v)^2 on every sample; sigma unused
//
// The non-converted ESJ term mixes a probability with a density value, so it
// is only bounded through the sigma floor.
SampleLoss sample_loss(LossKind kind, const Observation& label, const HeadOutput& out);

// Batch averages. Throw NonFiniteLoss when the result is not finite, and
// ShapeError when the spans differ in length or are empty.
double esj_loss(std::span<const Observation> batch, std::span<const HeadOutput> outputs);
double ziln_loss(std::span<const Observation> batch, std::span<const HeadOutput> outputs);
double ce_mse_loss(std::span<const Observation> batch, std::span<const HeadOutput> outputs);

double batch_loss(LossKind kind, std::span<const Observation> batch, std::span<const HeadOutput> outputs);

}  // namespace etv::model
