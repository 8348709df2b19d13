#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "etv/seed.hpp"
#include "etv/types.hpp"

namespace etv::sim {

// Ground-truth response model over concat(user, fund) features x:
//   logit q = b_p  + w_p . x  + s tanh(u' A_p  f)
//   mu      = b_mu + w_mu . x + s tanh(u' A_mu f) + kappa * log(q / logistic(b_p))
// with per-fund lognormal scale sigma_j. A_p and A_mu are user_dim x
// fund_dim (row-major) and give users different fund rankings; the tanh
// keeps their effect within +-s. kappa ties the purchase amount to the intent,
// so unlikely buyers also spend less.
struct TrueModel {
  std::vector<double> w_p;
  double b_p = 0.0;
  std::vector<double> w_mu;
  double b_mu = 0.0;
  std::vector<double> interaction_p;
  std::vector<double> interaction_mu;
  double interaction_scale = 1.0;
  std::vector<double> sigma;  // one per fund
  double intent_coupling = 0.0;

  double logit(std::span<const double> user, std::span<const double> fund) const;
  double mu(std::span<const double> user, std::span<const double> fund) const;
};

// How a pair's realized outcome follows from the true model.
//   Censored:  the logistic head is purchase intent q; an intending user
//              draws v ~ Normal(mu, sigma) and converts only if v >= 0.01,
//              otherwise the pair is an observed negative. Converted pairs
//              have v truncated below at 0.01 and P(converted) =
//              q * Phi((mu - 0.01) / sigma).
//   Bernoulli: converted ~ Bernoulli(q); v is then drawn from the same
//              truncated normal, so P(converted) = q.
enum class OutcomeModel { Censored, Bernoulli };

struct GeneratorConfig {
  std::size_t num_users = 2000;
  std::size_t num_funds = 8;
  std::size_t user_dim = 4;
  std::size_t fund_dim = 4;
  std::uint64_t seed = kDefaultSeed;

  // Used to draw a TrueModel when none is given.
  double base_logit = -4.2;
  double logit_weight_scale = 0.5;
  double base_mu = 6.0;
  double mu_weight_scale = 0.35;
  double interaction_scale = 1.0;
  double intent_coupling = 1.5;
  double sigma_low = 1.0;
  double sigma_high = 2.0;
  std::optional<TrueModel> true_model;
  OutcomeModel outcome_model = OutcomeModel::Censored;

  // Probability of each tolerance level 0..L for users, and of each risk
  // level for funds. The lowest-risk fund is forced to level 0 so every
  // user has at least one eligible fund.
  std::vector<double> tolerance_probs{0.25, 0.25, 0.25, 0.25};
  std::vector<double> fund_risk_probs{0.25, 0.25, 0.25, 0.25};

  // Fund popularity weights for the demand split; drawn from U(0.5, 1.5)
  // when empty.
  std::vector<double> popularity;

  // Throws ConfigError.
  void validate() const;
};

enum class Role { Train, Test };

struct Dataset {
  Instance instance;
  // Counterfactual outcome for every (user, fund) pair, row-major by user.
  std::vector<Observation> outcomes;
  TrueModel truth;
  std::vector<double> popularity;
};

// Users, features and outcomes come from role-specific seed streams; the
// true model, fund features, fund risk levels and popularity depend only on
// the root seed, so Train and Test datasets share the same funds.
//
// Outcomes: converted = (u_i < p_ij) and v_ij = F^-1(w_i) of Normal(mu_ij,
// sigma_j) truncated below at 0.01, with (u_i, w_i) uniform and shared by a
// user across funds; amount = exp(v) - 1.
//
// Demands are split by popularity with largest remainder, then shifted
// toward lower-risk funds wherever the higher-risk ones would ask for more
// users than are eligible, so the instance is always feasible.
Dataset generate(const GeneratorConfig& config, Role role = Role::Train);

// Per-pair truth, row-major N x K: the logistic head q, the latent location
// mu and the resulting conversion probability.
struct TruthGrid {
  std::vector<double> p;
  std::vector<double> mu;
  std::vector<double> conversion;
};
TruthGrid truth_grid(const TrueModel& truth, const Instance& instance,
                     OutcomeModel outcome_model = OutcomeModel::Censored);

// Expected realized amount E[converted * (exp(v) - 1)] per pair. As the
// truncation mass vanishes this tends to q * (exp(mu + sigma^2/2) - 1), the
// form the models predict.
EtvMatrix true_etv(const TrueModel& truth, const Instance& instance,
                   OutcomeModel outcome_model = OutcomeModel::Censored);

// Demand split used by generate(), exposed for testing.
std::vector<int> largest_remainder_split(std::size_t total, std::span<const double> weights);

std::string_view to_string(OutcomeModel model);
// "censored" or "bernoulli"; throws ConfigError.
OutcomeModel parse_outcome_model(std::string_view name);

nlohmann::json to_json(const TrueModel& truth);
TrueModel true_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GeneratorConfig& config);
GeneratorConfig generator_config_from_json(const nlohmann::json& j, GeneratorConfig base = {});

}  // namespace etv::sim
