#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <random>

#include "etv/error.hpp"
#include "etv/model/checkpoint.hpp"
#include "etv/model/loss.hpp"
#include "etv/model/predict.hpp"
#include "etv/model/train.hpp"
#include "etv/sim/generator.hpp"
#include "etv/sim/metrics.hpp"
#include "oracles/loss_golden.hpp"

using namespace etv;
using namespace etv::model;

namespace {

Observation label(bool converted, double amount) { return {0, 0, converted, amount}; }

HeadOutput head(double p, double mu, double sigma) {
  HeadOutput h;
  h.p = p;
  h.mu = mu;
  h.sigma = sigma;
  return h;
}

void mixed_batch(std::vector<Observation>& labels, std::vector<HeadOutput>& outs, bool with_logits) {
  for (const auto& r : oracle::kMixedBatch) {
    labels.push_back(label(r.converted, r.amount));
    HeadOutput h = head(r.p, r.mu, r.sigma);
    if (with_logits) h.logit = std::log(r.p / (1.0 - r.p));
    outs.push_back(h);
  }
}

// Random instance with features, and outcomes for a random subset of pairs.
struct SmallData {
  Instance instance;
  std::vector<Observation> obs;
};

SmallData small_data(std::mt19937_64& rng, std::size_t n, std::size_t k, std::size_t d, std::size_t m) {
  SmallData s;
  s.instance.user_feature_dim = d;
  s.instance.fund_feature_dim = m;
  std::normal_distribution<double> z;
  std::bernoulli_distribution coin(0.3);
  for (std::size_t i = 0; i < n; ++i) {
    UserRecord u{static_cast<int>(i), {}, 3};
    for (std::size_t a = 0; a < d; ++a) u.features.push_back(z(rng));
    s.instance.users.push_back(u);
  }
  for (std::size_t j = 0; j < k; ++j) {
    FundType f{static_cast<int>(j), {}, 0, 0};
    for (std::size_t b = 0; b < m; ++b) f.features.push_back(z(rng));
    s.instance.funds.push_back(f);
  }
  s.instance.funds[0].demand = static_cast<int>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const bool c = coin(rng);
      s.obs.push_back({static_cast<int>(i), static_cast<int>(j), c, c ? std::exp(std::abs(z(rng)) + 0.1) - 1.0 : 0.0});
    }
  }
  return s;
}

}  // namespace

TEST_CASE("loss golden values from the scripted oracle") {
  const double s0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  CHECK(sample_loss(LossKind::ESJ, label(true, std::numbers::e - 1.0), head(1.0, 1.0, s0)).loss ==
        doctest::Approx(oracle::kEsjPositiveUnit).epsilon(1e-12));
  CHECK(std::abs(sample_loss(LossKind::ESJ, label(false, 0.0), head(0.5, 0.0, s0)).loss - oracle::kEsjNegativeHalf) <
        1e-12);
  CHECK(std::abs(sample_loss(LossKind::ESJ, label(false, 0.0), head(1e-300, 2.0, 1.0)).loss) < 1e-12);

  for (bool with_logits : {false, true}) {
    CAPTURE(with_logits);
    std::vector<Observation> labels;
    std::vector<HeadOutput> outs;
    mixed_batch(labels, outs, with_logits);
    CHECK(std::abs(esj_loss(labels, outs) - oracle::kMixedEsj) < 1e-12);
    CHECK(std::abs(ziln_loss(labels, outs) - oracle::kMixedZiln) < 1e-12);
    CHECK(std::abs(ce_mse_loss(labels, outs) - oracle::kMixedCeMse) < 1e-12);
    const double rows[] = {oracle::kEsjRow0, oracle::kEsjRow1, oracle::kEsjRow2, oracle::kEsjRow3, oracle::kEsjRow4};
    for (std::size_t k = 0; k < labels.size(); ++k) {
      CHECK(std::abs(sample_loss(LossKind::ESJ, labels[k], outs[k]).loss - rows[k]) < 1e-12);
    }
  }
}

TEST_CASE("ziln cross-entropy part is log 2 at p = 0.5") {
  // mu = v on the positive, so only the Gaussian normalizer and Jacobian
  // remain in its regression term.
  const double v = std::log(4.0);
  const std::vector<Observation> labels{label(true, 3.0), label(false, 0.0)};
  const std::vector<HeadOutput> outs{head(0.5, v, 1.0), head(0.5, 0.0, 1.0)};
  const double regression = 0.5 * std::log(2.0 * std::numbers::pi) + v;
  CHECK(ziln_loss(labels, outs) - regression / 2.0 == doctest::Approx(oracle::kZilnSymmetricCe).epsilon(1e-12));
  CHECK(ziln_loss(std::vector{label(false, 0.0)}, std::vector{head(1e-300, 0.0, 1.0)}) == doctest::Approx(0.0));
}

TEST_CASE("ce_mse examples") {
  const double v = std::log1p(5.0);
  CHECK(ce_mse_loss(std::vector{label(true, 5.0), label(false, 0.0)},
                    std::vector{head(1.0, v, 1.0), head(1e-300, 0.0, 1.0)}) == doctest::Approx(0.0));
  CHECK(ce_mse_loss(std::vector{label(true, 5.0)}, std::vector{head(1.0, v + 1.0, 1.0)}) == doctest::Approx(1.0));
}

TEST_CASE("loss structure") {
  std::vector<Observation> labels;
  std::vector<HeadOutput> outs;
  mixed_batch(labels, outs, false);

  SUBCASE("permutation invariance") {
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::reverse(order.begin(), order.end());
    std::vector<Observation> l2;
    std::vector<HeadOutput> o2;
    for (auto k : order) {
      l2.push_back(labels[k]);
      o2.push_back(outs[k]);
    }
    CHECK(esj_loss(l2, o2) == doctest::Approx(esj_loss(labels, outs)).epsilon(1e-14));
  }
  SUBCASE("positives: esj equals ziln, and p = 1 leaves the lognormal nll") {
    const std::vector<Observation> pos{labels[0], labels[2]};
    const std::vector<HeadOutput> po{outs[0], outs[2]};
    CHECK(esj_loss(pos, po) == doctest::Approx(ziln_loss(pos, po)).epsilon(1e-14));
    std::vector<HeadOutput> certain = po;
    for (auto& h : certain) h.p = 1.0;
    const double v = labels[0].log_label();
    const double nll0 = 0.5 * std::log(2.0 * std::numbers::pi) + std::log(0.8) + v +
                        (v - 2.5) * (v - 2.5) / (2.0 * 0.8 * 0.8);
    CHECK(sample_loss(LossKind::ESJ, labels[0], certain[0]).loss == doctest::Approx(nll0).epsilon(1e-13));
  }
  SUBCASE("negative term bounded through the sigma floor") {
    const double d = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * kDefaultSigmaMin);
    for (double p : {0.01, 0.5, 0.99}) {
      const double loss = sample_loss(LossKind::ESJ, label(false, 0.0), head(p, 0.0, kDefaultSigmaMin)).loss;
      CHECK(loss == doctest::Approx(-std::log(1.0 - p + p * d)).epsilon(1e-12));
      CHECK(std::isfinite(loss));
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(esj_loss(labels, std::span(outs).first(2)), Error);
    CHECK_THROWS_AS(esj_loss({}, {}), Error);
    try {
      esj_loss(std::vector{label(true, 1.0)}, std::vector{head(0.5, 0.0, 0.0)});
      FAIL("expected NonFiniteLoss");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonFiniteLoss);
    }
  }
}

TEST_CASE("head gradients match finite differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::normal_distribution<double> z;
  for (LossKind kind : {LossKind::ESJ, LossKind::ZILN, LossKind::CE_MSE}) {
    for (int t = 0; t < 30; ++t) {
      const bool c = t % 2 == 0;
      const Observation lab = label(c, c ? std::exp(std::abs(z(rng))) : 0.0);
      const double logit = 2.0 * z(rng);
      auto eval = [&](double lg, double mu, double sigma) {
        HeadOutput h = head(logistic(lg), mu, sigma);
        h.logit = lg;
        return sample_loss(kind, lab, h);
      };
      const double mu = z(rng);
      const double sigma = 0.3 + unit(rng);
      const SampleLoss s = eval(logit, mu, sigma);
      const double h = 1e-6;
      CHECK(s.grad.d_logit == doctest::Approx((eval(logit + h, mu, sigma).loss - eval(logit - h, mu, sigma).loss) / (2 * h)).epsilon(1e-6));
      CHECK(s.grad.d_mu == doctest::Approx((eval(logit, mu + h, sigma).loss - eval(logit, mu - h, sigma).loss) / (2 * h)).epsilon(1e-6));
      if (kind != LossKind::CE_MSE) {
        CHECK(s.grad.d_sigma == doctest::Approx((eval(logit, mu, sigma + h).loss - eval(logit, mu, sigma - h).loss) / (2 * h)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("forward pass examples") {
  Architecture arch;
  arch.user_dim = 3;
  arch.fund_dim = 2;
  EsjModel zero(arch);
  const std::vector<double> u{1.0, -2.0, 0.5}, f{3.0, 0.0};
  const HeadOutput out = zero.forward(u, f);
  CHECK(out.p == 0.5);
  CHECK(out.mu == 0.0);
  CHECK(out.sigma == doctest::Approx(std::log(2.0) + kDefaultSigmaMin).epsilon(1e-15));

  EsjModel a = EsjModel::initialized(arch, 42);
  EsjModel b = EsjModel::initialized(arch, 42);
  CHECK(a == b);
  CHECK(a.forward(u, f).mu == b.forward(u, f).mu);
  CHECK_FALSE(a == EsjModel::initialized(arch, 43));

  // Zeroing the trunk weights cuts every feature path.
  for (std::size_t l = 0; l < arch.hidden.size(); ++l) {
    const auto& shape = a.layers()[l];
    std::fill_n(a.parameters().begin() + static_cast<std::ptrdiff_t>(shape.weight_offset), shape.rows * shape.cols, 0.0);
  }
  const std::vector<double> u2{-4.0, 9.0, 0.0}, f2{0.1, -0.7};
  CHECK(a.forward(u, f).p == a.forward(u2, f2).p);
  CHECK(a.forward(u, f).sigma == a.forward(u2, f2).sigma);
  CHECK(a.forward(u, f).sigma >= kDefaultSigmaMin);

  CHECK_THROWS_AS(zero.forward(std::vector<double>{1.0}, f), Error);
}

TEST_CASE("grad_check on random models and batches") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 6; ++t) {
    SmallData data = small_data(rng, 4, 3, 3, 2);
    Architecture arch;
    arch.user_dim = 3;
    arch.fund_dim = 2;
    arch.hidden = {5, 4};
    const EsjModel model = EsjModel::initialized(arch, 100 + t);
    const TrainingSet set = make_training_set(data.instance, data.obs);
    for (LossKind kind : {LossKind::ESJ, LossKind::ZILN, LossKind::CE_MSE}) {
      CHECK(grad_check(model, set, kind).max_relative_error < 1e-4);
    }
  }
  SmallData data = small_data(rng, 2, 2, 1, 1);
  Architecture arch;
  arch.user_dim = 1;
  arch.fund_dim = 1;
  const TrainingSet set = make_training_set(data.instance, data.obs);
  CHECK_THROWS_AS(grad_check(EsjModel(arch), set, LossKind::ESJ, 1e-2), Error);
  CHECK_THROWS_AS(grad_check(EsjModel(arch), set, LossKind::ESJ, 1e-9), Error);
}

TEST_CASE("predict examples and ETV properties") {
  CHECK(expected_transaction_value(0.0, 5.0, 1.0) == 0.0);
  CHECK(expected_transaction_value(1.0, 0.0, 0.0) == 0.0);
  CHECK(expected_transaction_value(0.5, std::log(101.0), 0.0) == doctest::Approx(50.0).epsilon(1e-14));
  CHECK(expected_transaction_value(0.7, -3.0, 0.1) == 0.0);
  CHECK(expected_transaction_value(0.3, 1.0, 0.5) < expected_transaction_value(0.4, 1.0, 0.5));
  CHECK(expected_transaction_value(0.3, 1.0, 0.5) < expected_transaction_value(0.3, 1.1, 0.5));

  std::mt19937_64 rng(8);
  SmallData data = small_data(rng, 30, 4, 2, 2);
  Architecture arch;
  arch.user_dim = 2;
  arch.fund_dim = 2;
  const EsjModel model = EsjModel::initialized(arch, 9);
  const EtvMatrix etv = predict_etv(model, data.instance);
  REQUIRE(etv.rows() == 30);
  for (double x : etv.values()) CHECK((std::isfinite(x) && x >= 0.0));
  const HeadOutput h = model.forward(data.instance.users[4].features, data.instance.funds[2].features);
  CHECK(etv(4, 2) == doctest::Approx(expected_transaction_value(h.p, h.mu, h.sigma)).epsilon(1e-14));
  const EtvMatrix flat = predict_etv(model, data.instance, LossKind::CE_MSE);
  CHECK(flat(4, 2) == doctest::Approx(expected_transaction_value(h.p, h.mu, 0.0)).epsilon(1e-14));

  data.instance.user_feature_dim = 3;
  CHECK_THROWS_AS(predict_etv(model, data.instance), Error);
}

TEST_CASE("training is deterministic and checkpoints round-trip") {
  std::mt19937_64 rng(21);
  SmallData data = small_data(rng, 200, 3, 2, 2);
  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.seed = 5;
  const TrainResult a = train(data.instance, data.obs, cfg);
  const TrainResult b = train(data.instance, data.obs, cfg);
  CHECK(a.model == b.model);
  CHECK(a.log.size() == b.log.size());
  for (std::size_t e = 0; e < a.log.size(); ++e) CHECK(a.log[e].val_loss == b.log[e].val_loss);
  cfg.seed = 6;
  CHECK_FALSE(train(data.instance, data.obs, cfg).model == a.model);

  const auto path = std::filesystem::temp_directory_path() / "etv_model_ckpt.json";
  Checkpoint ckpt{a.model, LossKind::ZILN, 5, to_json(cfg)};
  save_checkpoint(path, ckpt);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.model == a.model);
  CHECK(back.loss_kind == LossKind::ZILN);
  CHECK(back.seed == 5);
  CHECK(train_config_from_json(back.config).seed == 6);
  CHECK_THROWS_AS(train_config_from_json(nlohmann::json{{"learning_rat", 0.1}}), Error);
}

TEST_CASE("training errors") {
  Instance inst;
  inst.user_feature_dim = 1;
  inst.fund_feature_dim = 1;
  inst.users.push_back({0, {0.0}, 0});
  inst.funds.push_back({0, {0.0}, 0, 1});
  CHECK_THROWS_AS(train(inst, {}, TrainConfig{}), Error);
  TrainConfig bad;
  bad.learning_rate = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  const std::vector<Observation> stray{{3, 0, false, 0.0}};
  CHECK_THROWS_AS(make_training_set(inst, stray), Error);
}

TEST_CASE("constant features converge to the base rate") {
  Instance inst;
  inst.user_feature_dim = 2;
  inst.fund_feature_dim = 1;
  for (int i = 0; i < 2000; ++i) inst.users.push_back({i, {0.0, 0.0}, 0});
  inst.funds.push_back({0, {0.0}, 0, 2000});
  std::vector<Observation> obs;
  for (int i = 0; i < 2000; ++i) {
    const bool c = i % 10 < 2;
    obs.push_back({i, 0, c, c ? 4.0 : 0.0});
  }
  for (LossKind kind : {LossKind::ZILN, LossKind::CE_MSE}) {
    TrainConfig cfg;
    cfg.loss_kind = kind;
    const TrainResult r = train(inst, obs, cfg);
    const HeadOutput h = r.model.forward(inst.users[0].features, inst.funds[0].features);
    CHECK(h.p == doctest::Approx(0.2).epsilon(0.1));
  }
}

TEST_CASE("learned p ranks almost as well as the true p") {
  sim::GeneratorConfig gen;
  gen.num_users = 6250;
  gen.num_funds = 8;
  gen.user_dim = 2;
  gen.fund_dim = 2;
  gen.interaction_scale = 0.0;
  gen.intent_coupling = 0.0;
  gen.base_logit = -1.5;
  gen.logit_weight_scale = 1.0;
  gen.outcome_model = sim::OutcomeModel::Bernoulli;
  const sim::Dataset train_set = sim::generate(gen, sim::Role::Train);
  const sim::Dataset test_set = sim::generate(gen, sim::Role::Test);

  TrainConfig cfg;
  cfg.loss_kind = LossKind::ESJ;
  const TrainResult r = train(train_set.instance, train_set.outcomes, cfg);

  const sim::TruthGrid truth = sim::truth_grid(test_set.truth, test_set.instance, gen.outcome_model);
  std::vector<double> learned;
  std::vector<int> labels;
  for (const Observation& o : test_set.outcomes) {
    learned.push_back(r.model.forward(test_set.instance.users[o.user_id].features,
                                      test_set.instance.funds[o.fund_id].features).p);
    labels.push_back(o.converted ? 1 : 0);
  }
  const double bayes = sim::auc(truth.conversion, labels);
  const double model_auc = sim::auc(learned, labels);
  CAPTURE(bayes);
  CAPTURE(model_auc);
  CHECK(model_auc > 0.95 * bayes);
}
