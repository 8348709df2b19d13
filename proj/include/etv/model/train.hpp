#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "etv/model/esj_model.hpp"
#include "etv/seed.hpp"
#include "etv/types.hpp"

namespace etv::model {

// Observations with their concatenated (user, fund) feature rows
// materialized, ready for minibatching.
struct TrainingSet {
  std::size_t input_dim = 0;
  std::vector<double> inputs;  // row-major, one row per label
  std::vector<Observation> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> input(std::size_t k) const { return {inputs.data() + k * input_dim, input_dim}; }
};

// Throws ShapeError for out-of-range ids or inconsistent labels.
TrainingSet make_training_set(const Instance& instance, std::span<const Observation> observations);

TrainingSet subset(const TrainingSet& set, std::span<const std::size_t> rows);

// Mean loss over `rows` of `set` (all rows when empty). When `grad` is
// nonempty it receives the gradient of that mean with respect to the
// model parameters (overwritten, not accumulated).
double loss_and_gradient(const EsjModel& model, const TrainingSet& set, LossKind kind,
                         std::span<const std::size_t> rows, std::span<double> grad);

struct TrainConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 30;
  std::size_t early_stop_patience = 4;
  std::uint64_t seed = kDefaultSeed;
  LossKind loss_kind = LossKind::ESJ;
  double sigma_min = kDefaultSigmaMin;
  std::vector<std::size_t> hidden{32, 16};
  double validation_fraction = 0.1;
  // Global gradient-norm clip per minibatch; 0 disables.
  double max_grad_norm = 5.0;

  // Throws ConfigError when a field is out of range.
  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  EsjModel model;
  LossKind loss_kind;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
};

// Minibatch gradient descent with momentum. The observations are split
// 90/10 (validation_fraction) by a seeded shuffle; the parameters with the
// lowest validation loss are returned, and training stops after
// `early_stop_patience` epochs without improvement.
// Errors: EmptyData (no observations, or an empty split), Diverged (a
// non-finite minibatch loss or gradient).
TrainResult train(const Instance& instance, std::span<const Observation> observations, const TrainConfig& config);
TrainResult train(const TrainingSet& data, const Architecture& arch, const TrainConfig& config);

// Largest relative difference between analytic and central-difference
// gradients over all parameters; relative error is
// |a - n| / max(|a|, |n|, kGradCheckFloor).
inline constexpr double kGradCheckFloor = 1e-6;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_parameter = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// epsilon must lie in [1e-7, 1e-3]; throws ConfigError otherwise.
GradCheckResult grad_check(const EsjModel& model, const TrainingSet& batch, LossKind kind, double epsilon = 1e-5);

}  // namespace etv::model
