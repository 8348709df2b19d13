#include "etv/model/loss.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "etv/error.hpp"

namespace etv::model {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_p(const HeadOutput& out) {
  return std::isfinite(out.logit) ? -softplus(-out.logit) : std::log(out.p);
}

double log_one_minus_p(const HeadOutput& out) {
  return std::isfinite(out.logit) ? -softplus(out.logit) : std::log1p(-out.p);
}

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

// Lognormal negative log-likelihood of the log label for a converted
// sample, without the log p part.
SampleLoss lognormal_nll(const Observation& label, const HeadOutput& out) {
  const double v = label.log_label();
  const double resid = v - out.mu;
  const double s2 = out.sigma * out.sigma;
  SampleLoss r;
  r.loss = kHalfLog2Pi + std::log(out.sigma) + v + resid * resid / (2.0 * s2);
  r.grad.d_mu = -resid / s2;
  r.grad.d_sigma = 1.0 / out.sigma - resid * resid / (s2 * out.sigma);
  return r;
}

SampleLoss cross_entropy(const Observation& label, const HeadOutput& out) {
  SampleLoss r;
  if (label.converted) {
    r.loss = -log_p(out);
    r.grad.d_logit = out.p - 1.0;
  } else {
    r.loss = -log_one_minus_p(out);
    r.grad.d_logit = out.p;
  }
  return r;
}

SampleLoss esj_sample(const Observation& label, const HeadOutput& out) {
  if (label.converted) {
    SampleLoss r = lognormal_nll(label, out);
    r.loss -= log_p(out);
    r.grad.d_logit = out.p - 1.0;
    return r;
  }
  // Mixture of "no intention" (1 - p) and "intention with zero amount"
  // (p times the normal density of v = 0).
  const double s2 = out.sigma * out.sigma;
  const double log_density = -kHalfLog2Pi - std::log(out.sigma) - out.mu * out.mu / (2.0 * s2);
  const double a = log_one_minus_p(out);
  const double b = log_p(out) + log_density;
  const double total = log_add_exp(a, b);
  // Posterior weight of the intention component.
  const double w = b == kNegInf ? 0.0 : std::exp(b - total);
  SampleLoss r;
  r.loss = -total;
  r.grad.d_logit = out.p - w;
  r.grad.d_mu = w * out.mu / s2;
  r.grad.d_sigma = w * (1.0 / out.sigma - out.mu * out.mu / (s2 * out.sigma));
  return r;
}

SampleLoss ziln_sample(const Observation& label, const HeadOutput& out) {
  SampleLoss r = cross_entropy(label, out);
  if (label.converted) {
    const SampleLoss reg = lognormal_nll(label, out);
    r.loss += reg.loss;
    r.grad.d_mu = reg.grad.d_mu;
    r.grad.d_sigma = reg.grad.d_sigma;
  }
  return r;
}

SampleLoss ce_mse_sample(const Observation& label, const HeadOutput& out) {
  SampleLoss r = cross_entropy(label, out);
  const double resid = out.mu - label.log_label();
  r.loss += resid * resid;
  r.grad.d_mu = 2.0 * resid;
  return r;
}

}  // namespace

SampleLoss sample_loss(LossKind kind, const Observation& label, const HeadOutput& out) {
  switch (kind) {
    case LossKind::ESJ: return esj_sample(label, out);
    case LossKind::ZILN: return ziln_sample(label, out);
    case LossKind::CE_MSE: return ce_mse_sample(label, out);
  }
  return {};
}

double batch_loss(LossKind kind, std::span<const Observation> batch, std::span<const HeadOutput> outputs) {
  if (batch.size() != outputs.size() || batch.empty()) {
    throw Error(ErrorKind::ShapeError, "loss needs one output per sample and a nonempty batch (got " +
                                           std::to_string(batch.size()) + " samples, " +
                                           std::to_string(outputs.size()) + " outputs)");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) total += sample_loss(kind, batch[k], outputs[k]).loss;
  const double mean = total / static_cast<double>(batch.size());
  if (!std::isfinite(mean)) {
    throw Error(ErrorKind::NonFiniteLoss, std::string(to_string(kind)) + " loss is not finite; check the sigma floor");
  }
  return mean;
}

double esj_loss(std::span<const Observation> batch, std::span<const HeadOutput> outputs) {
  return batch_loss(LossKind::ESJ, batch, outputs);
}

double ziln_loss(std::span<const Observation> batch, std::span<const HeadOutput> outputs) {
  return batch_loss(LossKind::ZILN, batch, outputs);
}

double ce_mse_loss(std::span<const Observation> batch, std::span<const HeadOutput> outputs) {
  return batch_loss(LossKind::CE_MSE, batch, outputs);
}

}  // namespace etv::model
