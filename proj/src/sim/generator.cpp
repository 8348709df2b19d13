#include "etv/sim/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "etv/error.hpp"
#include "etv/model/esj_model.hpp"

namespace etv::sim {

using nlohmann::json;

namespace {

constexpr double kTruncation = 0.01;

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

double bilinear(std::span<const double> matrix, std::span<const double> user, std::span<const double> fund) {
  if (matrix.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t r = 0; r < user.size(); ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < fund.size(); ++c) row += matrix[r * fund.size() + c] * fund[c];
    acc += user[r] * row;
  }
  return acc;
}

double linear(std::span<const double> weights, std::span<const double> user, std::span<const double> fund) {
  return dot(weights.subspan(0, user.size()), user) + dot(weights.subspan(user.size()), fund);
}

// log(logistic(x)) without overflow.
double log_logistic(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

int draw_level(std::mt19937_64& rng, std::span<const double> probs) {
  std::discrete_distribution<int> dist(probs.begin(), probs.end());
  return dist(rng);
}

// Sample from Normal(mu, sigma) truncated below at kTruncation by inverting
// the upper-tail CDF at the shared uniform `u`.
double truncated_normal(double mu, double sigma, double u) {
  if (sigma <= 0.0) return std::max(mu, kTruncation);
  static const boost::math::normal_distribution<double> standard;
  const double a = (kTruncation - mu) / sigma;
  const double tail = boost::math::cdf(boost::math::complement(standard, a));
  const double q = tail * (1.0 - u);
  if (!(q > 0.0)) return kTruncation;
  const double z = boost::math::quantile(boost::math::complement(standard, q));
  return std::max(mu + sigma * z, kTruncation);
}

// Normal(mu, sigma) at quantile u; u = 0 maps to -infinity.
double latent_normal(double mu, double sigma, double u) {
  if (sigma <= 0.0) return mu;
  if (!(u > 0.0)) return -std::numeric_limits<double>::infinity();
  static const boost::math::normal_distribution<double> standard;
  return mu + sigma * boost::math::quantile(standard, u);
}

double standard_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// E[converted * (exp(v) - 1)] divided by q.
double expected_amount_given_intent(double mu, double sigma, OutcomeModel model) {
  if (sigma <= 0.0) {
    if (model == OutcomeModel::Bernoulli) return std::expm1(std::max(mu, kTruncation));
    return mu >= kTruncation ? std::expm1(mu) : 0.0;
  }
  const double kept = standard_cdf((mu - kTruncation) / sigma);
  const double tilted = std::exp(mu + 0.5 * sigma * sigma) * standard_cdf((mu + sigma * sigma - kTruncation) / sigma);
  if (model == OutcomeModel::Censored) return std::max(0.0, tilted - kept);
  if (!(kept > 1e-300)) return std::expm1(kTruncation);
  return std::max(std::expm1(kTruncation), tilted / kept - 1.0);
}

TrueModel draw_true_model(const GeneratorConfig& config) {
  std::mt19937_64 rng(derive_seed(config.seed, SeedStage::TrueModel));
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t width = config.user_dim + config.fund_dim;
  const std::size_t cells = config.user_dim * config.fund_dim;
  TrueModel truth;
  truth.b_p = config.base_logit;
  truth.b_mu = config.base_mu;
  truth.intent_coupling = config.intent_coupling;
  truth.w_p.resize(width);
  truth.w_mu.resize(width);
  for (auto& w : truth.w_p) w = config.logit_weight_scale * normal(rng);
  for (auto& w : truth.w_mu) w = config.mu_weight_scale * normal(rng);
  truth.interaction_p.resize(cells);
  truth.interaction_mu.resize(cells);
  const double entry_scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(cells, 1)));
  for (auto& w : truth.interaction_p) w = entry_scale * normal(rng);
  for (auto& w : truth.interaction_mu) w = entry_scale * normal(rng);
  truth.interaction_scale = config.interaction_scale;
  std::uniform_real_distribution<double> sigma(config.sigma_low, config.sigma_high);
  truth.sigma.resize(config.num_funds);
  for (auto& s : truth.sigma) s = sigma(rng);
  return truth;
}

// Moves demand from riskier funds to safer ones until, for every level L,
// the funds at risk >= L ask for no more users than have tolerance >= L.
void make_feasible(Instance& instance, std::span<const double> popularity) {
  int max_level = 0;
  for (const auto& f : instance.funds) max_level = std::max(max_level, f.risk_level);
  for (const auto& u : instance.users) max_level = std::max(max_level, u.risk_tolerance);

  for (int level = max_level; level > 0; --level) {
    long long capacity = 0;
    for (const auto& u : instance.users) capacity += u.risk_tolerance >= level ? 1 : 0;
    long long demand = 0;
    for (const auto& f : instance.funds) demand += f.risk_level >= level ? f.demand : 0;
    long long excess = demand - capacity;
    if (excess <= 0) continue;

    // Take from the largest riskier funds, give to the most popular safer one.
    int receiver = -1;
    for (std::size_t j = 0; j < instance.funds.size(); ++j) {
      if (instance.funds[j].risk_level >= level) continue;
      if (receiver < 0 || popularity[j] > popularity[receiver]) receiver = static_cast<int>(j);
    }
    while (excess > 0) {
      int donor = -1;
      for (std::size_t j = 0; j < instance.funds.size(); ++j) {
        const auto& f = instance.funds[j];
        if (f.risk_level < level || f.demand == 0) continue;
        if (donor < 0 || f.demand > instance.funds[donor].demand) donor = static_cast<int>(j);
      }
      const long long moved = std::min<long long>(excess, instance.funds[donor].demand);
      instance.funds[donor].demand -= static_cast<int>(moved);
      instance.funds[receiver].demand += static_cast<int>(moved);
      excess -= moved;
    }
  }
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

double TrueModel::logit(std::span<const double> user, std::span<const double> fund) const {
  return b_p + linear(w_p, user, fund) + interaction_scale * std::tanh(bilinear(interaction_p, user, fund));
}

double TrueModel::mu(std::span<const double> user, std::span<const double> fund) const {
  double out = b_mu + linear(w_mu, user, fund) + interaction_scale * std::tanh(bilinear(interaction_mu, user, fund));
  if (intent_coupling != 0.0) {
    out += intent_coupling * (log_logistic(logit(user, fund)) - log_logistic(b_p));
  }
  return out;
}

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigError, what); };
  if (num_users == 0) fail("num_users must be positive");
  if (num_funds == 0) fail("num_funds must be positive");
  auto check_probs = [&](const std::vector<double>& probs, const char* name) {
    if (probs.empty()) fail(std::string(name) + " must not be empty");
    double total = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) fail(std::string(name) + " entries must be finite and >= 0");
      total += p;
    }
    if (!(total > 0.0)) fail(std::string(name) + " must have positive mass");
  };
  check_probs(tolerance_probs, "tolerance_probs");
  check_probs(fund_risk_probs, "fund_risk_probs");
  if (!popularity.empty()) {
    if (popularity.size() != num_funds) fail("popularity needs one weight per fund");
    check_probs(popularity, "popularity");
  }
  if (!(sigma_low >= 0.0) || !(sigma_high >= sigma_low)) fail("need 0 <= sigma_low <= sigma_high");
  if (true_model) {
    const auto& t = *true_model;
    const std::size_t width = user_dim + fund_dim;
    if (t.w_p.size() != width || t.w_mu.size() != width) fail("true_model weights must have user_dim + fund_dim entries");
    const std::size_t cells = user_dim * fund_dim;
    if ((!t.interaction_p.empty() && t.interaction_p.size() != cells) ||
        (!t.interaction_mu.empty() && t.interaction_mu.size() != cells)) {
      fail("true_model interactions must be user_dim x fund_dim");
    }
    if (t.sigma.size() != num_funds) fail("true_model needs one sigma per fund");
    for (double s : t.sigma) {
      if (!(s >= 0.0) || !std::isfinite(s)) fail("true_model sigma must be finite and >= 0");
    }
  }
}

std::vector<int> largest_remainder_split(std::size_t total, std::span<const double> weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> out(weights.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double exact = static_cast<double>(total) * weights[j] / sum;
    const double whole = std::floor(exact);
    out[j] = static_cast<int>(whole);
    assigned += static_cast<std::size_t>(whole);
    remainders.emplace_back(exact - whole, j);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++out[remainders[r % remainders.size()].second];
  return out;
}

Dataset generate(const GeneratorConfig& config, Role role) {
  config.validate();
  Dataset data;
  data.truth = config.true_model ? *config.true_model : draw_true_model(config);

  Instance& instance = data.instance;
  instance.user_feature_dim = config.user_dim;
  instance.fund_feature_dim = config.fund_dim;

  std::mt19937_64 fund_rng(derive_seed(config.seed, SeedStage::Funds));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  data.popularity = config.popularity;
  if (data.popularity.empty()) {
    data.popularity.resize(config.num_funds);
    for (auto& w : data.popularity) w = 0.5 + unit(fund_rng);
  }
  instance.funds.resize(config.num_funds);
  for (std::size_t j = 0; j < config.num_funds; ++j) {
    FundType& fund = instance.funds[j];
    fund.id = static_cast<int>(j);
    fund.risk_level = draw_level(fund_rng, config.fund_risk_probs);
    fund.features.resize(config.fund_dim);
    for (auto& g : fund.features) g = normal(fund_rng);
  }
  auto safest = std::min_element(instance.funds.begin(), instance.funds.end(),
                                 [](const FundType& a, const FundType& b) { return a.risk_level < b.risk_level; });
  safest->risk_level = 0;

  const bool train = role == Role::Train;
  std::mt19937_64 user_rng(derive_seed(config.seed, train ? SeedStage::TrainUsers : SeedStage::TestUsers));
  instance.users.resize(config.num_users);
  for (std::size_t i = 0; i < config.num_users; ++i) {
    UserRecord& user = instance.users[i];
    user.id = static_cast<int>(i);
    user.risk_tolerance = draw_level(user_rng, config.tolerance_probs);
    user.features.resize(config.user_dim);
    for (auto& f : user.features) f = normal(user_rng);
  }

  const auto demands = largest_remainder_split(config.num_users, data.popularity);
  for (std::size_t j = 0; j < config.num_funds; ++j) instance.funds[j].demand = demands[j];
  make_feasible(instance, data.popularity);

  std::mt19937_64 outcome_rng(derive_seed(config.seed, train ? SeedStage::TrainOutcomes : SeedStage::TestOutcomes));
  data.outcomes.reserve(config.num_users * config.num_funds);
  for (std::size_t i = 0; i < config.num_users; ++i) {
    const double u_convert = unit(outcome_rng);
    const double u_amount = unit(outcome_rng);
    const auto& x_user = instance.users[i].features;
    for (std::size_t j = 0; j < config.num_funds; ++j) {
      const auto& x_fund = instance.funds[j].features;
      const double q = model::logistic(data.truth.logit(x_user, x_fund));
      const double mu = data.truth.mu(x_user, x_fund);
      const double sigma = data.truth.sigma[j];
      Observation obs{static_cast<int>(i), static_cast<int>(j), false, 0.0};
      if (u_convert < q) {
        if (config.outcome_model == OutcomeModel::Bernoulli) {
          obs.converted = true;
          obs.amount = std::expm1(truncated_normal(mu, sigma, u_amount));
        } else {
          const double v = latent_normal(mu, sigma, u_amount);
          if (v >= kTruncation) {
            obs.converted = true;
            obs.amount = std::expm1(v);
          }
        }
      }
      data.outcomes.push_back(obs);
    }
  }
  return data;
}

TruthGrid truth_grid(const TrueModel& truth, const Instance& instance, OutcomeModel outcome_model) {
  if (truth.sigma.size() != instance.num_funds()) throw Error(ErrorKind::ShapeError, "truth has wrong fund count");
  TruthGrid grid;
  const std::size_t n = instance.num_users();
  const std::size_t k = instance.num_funds();
  grid.p.resize(n * k);
  grid.mu.resize(n * k);
  grid.conversion.resize(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto& u = instance.users[i].features;
      const auto& f = instance.funds[j].features;
      const std::size_t c = i * k + j;
      grid.p[c] = model::logistic(truth.logit(u, f));
      grid.mu[c] = truth.mu(u, f);
      double kept = 1.0;
      if (outcome_model == OutcomeModel::Censored) {
        const double s = truth.sigma[j];
        kept = s > 0.0 ? standard_cdf((grid.mu[c] - kTruncation) / s) : (grid.mu[c] >= kTruncation ? 1.0 : 0.0);
      }
      grid.conversion[c] = grid.p[c] * kept;
    }
  }
  return grid;
}

EtvMatrix true_etv(const TrueModel& truth, const Instance& instance, OutcomeModel outcome_model) {
  const TruthGrid grid = truth_grid(truth, instance, outcome_model);
  const std::size_t k = instance.num_funds();
  std::vector<double> values(grid.p.size());
  for (std::size_t c = 0; c < values.size(); ++c) {
    values[c] = grid.p[c] * expected_amount_given_intent(grid.mu[c], truth.sigma[c % k], outcome_model);
  }
  return EtvMatrix(instance.num_users(), k, std::move(values));
}

std::string_view to_string(OutcomeModel model) {
  return model == OutcomeModel::Censored ? "censored" : "bernoulli";
}

OutcomeModel parse_outcome_model(std::string_view name) {
  if (name == "censored") return OutcomeModel::Censored;
  if (name == "bernoulli") return OutcomeModel::Bernoulli;
  throw Error(ErrorKind::ConfigError, "unknown outcome model '" + std::string(name) + "'");
}

json to_json(const TrueModel& truth) {
  return json{{"w_p", truth.w_p},
              {"b_p", truth.b_p},
              {"w_mu", truth.w_mu},
              {"b_mu", truth.b_mu},
              {"interaction_p", truth.interaction_p},
              {"interaction_mu", truth.interaction_mu},
              {"interaction_scale", truth.interaction_scale},
              {"sigma", truth.sigma},
              {"intent_coupling", truth.intent_coupling}};
}

TrueModel true_model_from_json(const json& j) {
  try {
    TrueModel t;
    t.w_p = j.at("w_p").get<std::vector<double>>();
    t.b_p = j.at("b_p").get<double>();
    t.w_mu = j.at("w_mu").get<std::vector<double>>();
    t.b_mu = j.at("b_mu").get<double>();
    t.interaction_p = j.value("interaction_p", std::vector<double>{});
    t.interaction_mu = j.value("interaction_mu", std::vector<double>{});
    t.interaction_scale = j.value("interaction_scale", 1.0);
    t.sigma = j.at("sigma").get<std::vector<double>>();
    t.intent_coupling = j.value("intent_coupling", 0.0);
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("true_model: ") + e.what());
  }
}

json to_json(const GeneratorConfig& config) {
  json j{{"num_users", config.num_users},
         {"num_funds", config.num_funds},
         {"user_dim", config.user_dim},
         {"fund_dim", config.fund_dim},
         {"seed", config.seed},
         {"base_logit", config.base_logit},
         {"logit_weight_scale", config.logit_weight_scale},
         {"base_mu", config.base_mu},
         {"mu_weight_scale", config.mu_weight_scale},
         {"interaction_scale", config.interaction_scale},
         {"intent_coupling", config.intent_coupling},
         {"sigma_low", config.sigma_low},
         {"sigma_high", config.sigma_high},
         {"tolerance_probs", config.tolerance_probs},
         {"fund_risk_probs", config.fund_risk_probs},
         {"popularity", config.popularity},
         {"outcome_model", std::string(to_string(config.outcome_model))}};
  if (config.true_model) j["true_model"] = to_json(*config.true_model);
  return j;
}

GeneratorConfig generator_config_from_json(const json& j, GeneratorConfig base) {
  static const std::vector<std::string> known{
      "num_users",       "num_funds",     "user_dim",          "fund_dim",   "seed",       "base_logit",
      "logit_weight_scale", "base_mu",    "mu_weight_scale",   "interaction_scale", "intent_coupling", "sigma_low", "sigma_high",
      "tolerance_probs", "fund_risk_probs", "popularity",      "true_model", "outcome_model"};
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "generator config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorKind::ConfigError, "unknown generator config key '" + key + "'");
    }
  }
  try {
    read_if(j, "num_users", base.num_users);
    read_if(j, "num_funds", base.num_funds);
    read_if(j, "user_dim", base.user_dim);
    read_if(j, "fund_dim", base.fund_dim);
    read_if(j, "seed", base.seed);
    read_if(j, "base_logit", base.base_logit);
    read_if(j, "logit_weight_scale", base.logit_weight_scale);
    read_if(j, "base_mu", base.base_mu);
    read_if(j, "mu_weight_scale", base.mu_weight_scale);
    read_if(j, "interaction_scale", base.interaction_scale);
    read_if(j, "intent_coupling", base.intent_coupling);
    read_if(j, "sigma_low", base.sigma_low);
    read_if(j, "sigma_high", base.sigma_high);
    read_if(j, "tolerance_probs", base.tolerance_probs);
    read_if(j, "fund_risk_probs", base.fund_risk_probs);
    read_if(j, "popularity", base.popularity);
    if (j.contains("outcome_model")) base.outcome_model = parse_outcome_model(j.at("outcome_model").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("generator config: ") + e.what());
  }
  if (j.contains("true_model")) base.true_model = true_model_from_json(j.at("true_model"));
  base.validate();
  return base;
}

}  // namespace etv::sim
