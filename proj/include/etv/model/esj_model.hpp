#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace etv::model {

enum class LossKind { ESJ, ZILN, CE_MSE };

std::string_view to_string(LossKind kind);
// Accepts "esj", "ziln", "ce_mse" (case-insensitive); throws ConfigError.
LossKind parse_loss_kind(std::string_view name);

inline constexpr double kDefaultSigmaMin = 0.05;

struct Architecture {
  std::size_t user_dim = 0;
  std::size_t fund_dim = 0;
  std::vector<std::size_t> hidden{32, 16};
  double sigma_min = kDefaultSigmaMin;

  std::size_t input_dim() const { return user_dim + fund_dim; }
  friend bool operator==(const Architecture&, const Architecture&) = default;
};

// Conversion probability p, lognormal location mu and scale sigma for one
// user-fund pair. `logit` is the pre-squash score behind p when known; the
// losses use it for a stable log p.
struct HeadOutput {
  double p = 0.5;
  double mu = 0.0;
  double sigma = 1.0;
  double logit = std::numeric_limits<double>::quiet_NaN();
};

// Loss gradient with respect to the three head pre-activations: the logit
// behind p, mu itself, and sigma (the softplus chain is applied in
// backward()).
struct HeadGradient {
  double d_logit = 0.0;
  double d_mu = 0.0;
  double d_sigma = 0.0;
};

// Feedforward tanh trunk over concat(user_features, fund_features) feeding
// three affine heads:
//   p     = logistic(w_p . h + b_p)
//   mu    = w_mu . h + b_mu
//   sigma = softplus(w_s . h + b_s) + sigma_min
// All parameters live in one flat vector; layer l of the trunk stores its
// (out x in) weights row-major followed by its bias, then the three heads
// store weights followed by a scalar bias each.
class EsjModel {
 public:
  explicit EsjModel(Architecture arch);

  // Glorot-uniform trunk and head weights, zero biases.
  static EsjModel initialized(Architecture arch, std::uint64_t seed);

  const Architecture& architecture() const { return arch_; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t num_parameters() const { return params_.size(); }

  // Throws ShapeError on dimension mismatch.
  HeadOutput forward(std::span<const double> user_features, std::span<const double> fund_features) const;
  HeadOutput forward(std::span<const double> input) const;

  // Activations kept for one sample's backward pass.
  struct Trace {
    std::vector<std::vector<double>> activations;  // input, then each hidden layer output
    double sigma_preactivation = 0.0;
    HeadOutput out;
  };

  void forward(std::span<const double> input, Trace& trace) const;

  // Accumulates dLoss/dparams for one sample into `grad` (same layout as
  // parameters()).
  void backward(const Trace& trace, const HeadGradient& head_grad, std::span<double> grad) const;

  struct LayerShape {
    std::size_t rows = 0;  // outputs
    std::size_t cols = 0;  // inputs
    std::size_t weight_offset = 0;
    std::size_t bias_offset = 0;
    friend bool operator==(const LayerShape&, const LayerShape&) = default;
  };

  // Trunk layers followed by the p, mu and sigma heads (rows == 1).
  const std::vector<LayerShape>& layers() const { return layers_; }

  friend bool operator==(const EsjModel&, const EsjModel&) = default;

 private:
  Architecture arch_;
  std::vector<LayerShape> layers_;
  std::vector<double> params_;
};

double logistic(double x);
double softplus(double x);

}  // namespace etv::model
