#include "etv/model/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "etv/error.hpp"
#include "etv/model/loss.hpp"

namespace etv::model {

TrainingSet make_training_set(const Instance& instance, std::span<const Observation> observations) {
  TrainingSet set;
  set.input_dim = instance.user_feature_dim + instance.fund_feature_dim;
  set.inputs.reserve(observations.size() * set.input_dim);
  set.labels.reserve(observations.size());
  for (const Observation& obs : observations) {
    if (obs.user_id < 0 || static_cast<std::size_t>(obs.user_id) >= instance.num_users() || obs.fund_id < 0 ||
        static_cast<std::size_t>(obs.fund_id) >= instance.num_funds()) {
      throw Error(ErrorKind::ShapeError, "observation refers to unknown user " + std::to_string(obs.user_id) +
                                             " or fund " + std::to_string(obs.fund_id));
    }
    check_observation(obs);
    const auto& user = instance.users[obs.user_id].features;
    const auto& fund = instance.funds[obs.fund_id].features;
    if (user.size() != instance.user_feature_dim || fund.size() != instance.fund_feature_dim) {
      throw Error(ErrorKind::ShapeError, "feature dimension mismatch in instance");
    }
    set.inputs.insert(set.inputs.end(), user.begin(), user.end());
    set.inputs.insert(set.inputs.end(), fund.begin(), fund.end());
    set.labels.push_back(obs);
  }
  return set;
}

TrainingSet subset(const TrainingSet& set, std::span<const std::size_t> rows) {
  TrainingSet out;
  out.input_dim = set.input_dim;
  out.inputs.reserve(rows.size() * set.input_dim);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    const auto in = set.input(r);
    out.inputs.insert(out.inputs.end(), in.begin(), in.end());
    out.labels.push_back(set.labels[r]);
  }
  return out;
}

double loss_and_gradient(const EsjModel& model, const TrainingSet& set, LossKind kind,
                         std::span<const std::size_t> rows, std::span<double> grad) {
  const std::size_t count = rows.empty() ? set.size() : rows.size();
  if (count == 0) throw Error(ErrorKind::EmptyData, "loss over an empty batch");
  const bool want_grad = !grad.empty();
  if (want_grad) {
    if (grad.size() != model.num_parameters()) throw Error(ErrorKind::ShapeError, "gradient buffer size mismatch");
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  const double scale = 1.0 / static_cast<double>(count);
  EsjModel::Trace trace;
  double total = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t row = rows.empty() ? k : rows[k];
    model.forward(set.input(row), trace);
    const SampleLoss s = sample_loss(kind, set.labels[row], trace.out);
    total += s.loss;
    if (want_grad) {
      const HeadGradient g{s.grad.d_logit * scale, s.grad.d_mu * scale, s.grad.d_sigma * scale};
      model.backward(trace, g, grad);
    }
  }
  return total * scale;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigError, what); };
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) fail("momentum must lie in [0, 1)");
  if (batch_size == 0) fail("batch_size must be positive");
  if (max_epochs == 0) fail("max_epochs must be positive");
  if (early_stop_patience == 0) fail("early_stop_patience must be positive");
  if (!(sigma_min > 0.0)) fail("sigma_min must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) fail("validation_fraction must lie in (0, 1)");
  if (max_grad_norm < 0.0) fail("max_grad_norm must be >= 0");
}

TrainResult train(const Instance& instance, std::span<const Observation> observations, const TrainConfig& config) {
  Architecture arch{instance.user_feature_dim, instance.fund_feature_dim, config.hidden, config.sigma_min};
  return train(make_training_set(instance, observations), arch, config);
}

TrainResult train(const TrainingSet& data, const Architecture& arch, const TrainConfig& config) {
  config.validate();
  if (data.input_dim != arch.input_dim()) throw Error(ErrorKind::ShapeError, "training set width mismatch");
  if (data.size() < 2) throw Error(ErrorKind::EmptyData, "need at least two observations to train");

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 split_rng(derive_seed(config.seed, SeedStage::Split));
  std::shuffle(order.begin(), order.end(), split_rng);
  const auto val_count = static_cast<std::size_t>(
      std::llround(config.validation_fraction * static_cast<double>(data.size())));
  if (val_count == 0 || val_count >= data.size()) {
    throw Error(ErrorKind::EmptyData, "train/validation split leaves an empty side");
  }
  std::vector<std::size_t> val_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(val_count));
  std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(val_count), order.end());
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  EsjModel model = EsjModel::initialized(arch, derive_seed(config.seed, SeedStage::ModelInit));
  std::vector<double> grad(model.num_parameters());
  std::vector<double> velocity(model.num_parameters(), 0.0);

  TrainResult result{model, config.loss_kind, {}, 0,
                     loss_and_gradient(model, data, config.loss_kind, val_rows, {})};
  std::size_t stale_epochs = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, SeedStage::Shuffle, epoch));
    std::shuffle(train_rows.begin(), train_rows.end(), shuffle_rng);

    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < train_rows.size(); begin += config.batch_size) {
      const std::size_t end = std::min(train_rows.size(), begin + config.batch_size);
      const std::span<const std::size_t> batch(train_rows.data() + begin, end - begin);
      const double loss = loss_and_gradient(model, data, config.loss_kind, batch, grad);

      double norm2 = 0.0;
      for (double g : grad) norm2 += g * g;
      if (!std::isfinite(loss) || !std::isfinite(norm2)) {
        throw Error(ErrorKind::Diverged, "non-finite loss or gradient at epoch " + std::to_string(epoch));
      }
      double step = config.learning_rate;
      if (config.max_grad_norm > 0.0 && norm2 > config.max_grad_norm * config.max_grad_norm) {
        step *= config.max_grad_norm / std::sqrt(norm2);
      }
      auto params = model.parameters();
      for (std::size_t k = 0; k < params.size(); ++k) {
        velocity[k] = config.momentum * velocity[k] - step * grad[k];
        params[k] += velocity[k];
      }
      epoch_loss += loss * static_cast<double>(end - begin);
    }
    epoch_loss /= static_cast<double>(train_rows.size());

    const double val_loss = loss_and_gradient(model, data, config.loss_kind, val_rows, {});
    if (!std::isfinite(val_loss)) {
      throw Error(ErrorKind::Diverged, "validation loss is not finite at epoch " + std::to_string(epoch));
    }
    result.log.push_back({epoch, epoch_loss, val_loss});

    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      result.model = model;
      stale_epochs = 0;
    } else if (++stale_epochs >= config.early_stop_patience) {
      break;
    }
  }
  return result;
}

GradCheckResult grad_check(const EsjModel& model, const TrainingSet& batch, LossKind kind, double epsilon) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw Error(ErrorKind::ConfigError, "grad_check epsilon must lie in [1e-7, 1e-3]");
  }
  std::vector<double> analytic(model.num_parameters());
  loss_and_gradient(model, batch, kind, {}, analytic);

  EsjModel probe = model;
  GradCheckResult result;
  for (std::size_t k = 0; k < model.num_parameters(); ++k) {
    const double original = probe.parameters()[k];
    probe.parameters()[k] = original + epsilon;
    const double up = loss_and_gradient(probe, batch, kind, {}, {});
    probe.parameters()[k] = original - epsilon;
    const double down = loss_and_gradient(probe, batch, kind, {}, {});
    probe.parameters()[k] = original;

    const double numeric = (up - down) / (2.0 * epsilon);
    const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), kGradCheckFloor});
    const double rel = std::abs(analytic[k] - numeric) / denom;
    if (rel > result.max_relative_error || k == 0) {
      result = {rel, k, analytic[k], numeric};
    }
  }
  return result;
}

}  // namespace etv::model
