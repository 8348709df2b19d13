#include "etv/model/esj_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <string>

#include "etv/error.hpp"

namespace etv::model {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::ESJ: return "esj";
    case LossKind::ZILN: return "ziln";
    case LossKind::CE_MSE: return "ce_mse";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "esj") return LossKind::ESJ;
  if (lower == "ziln") return LossKind::ZILN;
  if (lower == "ce_mse" || lower == "ce-mse" || lower == "mse") return LossKind::CE_MSE;
  throw Error(ErrorKind::ConfigError, "unknown loss kind '" + std::string(name) + "'");
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

EsjModel::EsjModel(Architecture arch) : arch_(std::move(arch)) {
  if (arch_.sigma_min <= 0.0) throw Error(ErrorKind::ConfigError, "sigma_min must be positive");
  std::size_t offset = 0;
  std::size_t in = arch_.input_dim();
  auto add_layer = [&](std::size_t rows, std::size_t cols) {
    LayerShape shape{rows, cols, offset, offset + rows * cols};
    offset += rows * cols + rows;
    layers_.push_back(shape);
  };
  for (std::size_t width : arch_.hidden) {
    if (width == 0) throw Error(ErrorKind::ConfigError, "hidden layer width must be positive");
    add_layer(width, in);
    in = width;
  }
  for (int head = 0; head < 3; ++head) add_layer(1, in);
  params_.assign(offset, 0.0);
}

EsjModel EsjModel::initialized(Architecture arch, std::uint64_t seed) {
  EsjModel model(std::move(arch));
  std::mt19937_64 rng(seed);
  for (const auto& layer : model.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.rows + layer.cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t k = 0; k < layer.rows * layer.cols; ++k) model.params_[layer.weight_offset + k] = dist(rng);
  }
  return model;
}

HeadOutput EsjModel::forward(std::span<const double> user_features, std::span<const double> fund_features) const {
  if (user_features.size() != arch_.user_dim || fund_features.size() != arch_.fund_dim) {
    throw Error(ErrorKind::ShapeError, "model expects " + std::to_string(arch_.user_dim) + " user and " +
                                           std::to_string(arch_.fund_dim) + " fund features, got " +
                                           std::to_string(user_features.size()) + " and " +
                                           std::to_string(fund_features.size()));
  }
  std::vector<double> input(user_features.begin(), user_features.end());
  input.insert(input.end(), fund_features.begin(), fund_features.end());
  return forward(input);
}

HeadOutput EsjModel::forward(std::span<const double> input) const {
  Trace trace;
  forward(input, trace);
  return trace.out;
}

void EsjModel::forward(std::span<const double> input, Trace& trace) const {
  if (input.size() != arch_.input_dim()) {
    throw Error(ErrorKind::ShapeError, "model expects input of size " + std::to_string(arch_.input_dim()) +
                                           ", got " + std::to_string(input.size()));
  }
  const std::size_t trunk_layers = arch_.hidden.size();
  trace.activations.resize(trunk_layers + 1);
  trace.activations[0].assign(input.begin(), input.end());

  for (std::size_t l = 0; l < trunk_layers; ++l) {
    const LayerShape& layer = layers_[l];
    const auto& x = trace.activations[l];
    auto& y = trace.activations[l + 1];
    y.resize(layer.rows);
    for (std::size_t r = 0; r < layer.rows; ++r) {
      const double* w = params_.data() + layer.weight_offset + r * layer.cols;
      double acc = params_[layer.bias_offset + r];
      for (std::size_t c = 0; c < layer.cols; ++c) acc += w[c] * x[c];
      y[r] = std::tanh(acc);
    }
  }

  const auto& h = trace.activations.back();
  auto head = [&](std::size_t index) {
    const LayerShape& layer = layers_[trunk_layers + index];
    double acc = params_[layer.bias_offset];
    for (std::size_t c = 0; c < layer.cols; ++c) acc += params_[layer.weight_offset + c] * h[c];
    return acc;
  };
  const double logit = head(0);
  trace.out.logit = logit;
  trace.out.p = logistic(logit);
  trace.out.mu = head(1);
  trace.sigma_preactivation = head(2);
  trace.out.sigma = softplus(trace.sigma_preactivation) + arch_.sigma_min;
}

void EsjModel::backward(const Trace& trace, const HeadGradient& head_grad, std::span<double> grad) const {
  const std::size_t trunk_layers = arch_.hidden.size();
  const auto& h = trace.activations.back();

  // Gradients at the three head pre-activations.
  const double upstream[3] = {head_grad.d_logit, head_grad.d_mu,
                              head_grad.d_sigma * logistic(trace.sigma_preactivation)};

  std::vector<double> delta(h.size(), 0.0);
  for (std::size_t index = 0; index < 3; ++index) {
    const LayerShape& layer = layers_[trunk_layers + index];
    const double g = upstream[index];
    grad[layer.bias_offset] += g;
    for (std::size_t c = 0; c < layer.cols; ++c) {
      grad[layer.weight_offset + c] += g * h[c];
      delta[c] += g * params_[layer.weight_offset + c];
    }
  }

  for (std::size_t l = trunk_layers; l-- > 0;) {
    const LayerShape& layer = layers_[l];
    const auto& x = trace.activations[l];
    const auto& y = trace.activations[l + 1];
    std::vector<double> next(layer.cols, 0.0);
    for (std::size_t r = 0; r < layer.rows; ++r) {
      const double g = delta[r] * (1.0 - y[r] * y[r]);
      grad[layer.bias_offset + r] += g;
      double* gw = grad.data() + layer.weight_offset + r * layer.cols;
      const double* w = params_.data() + layer.weight_offset + r * layer.cols;
      for (std::size_t c = 0; c < layer.cols; ++c) {
        gw[c] += g * x[c];
        next[c] += g * w[c];
      }
    }
    delta = std::move(next);
  }
}

}  // namespace etv::model
