#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "etv/csv.hpp"
#include "etv/error.hpp"
#include "etv/maxflow.hpp"
#include "etv/seed.hpp"
#include "etv/validate.hpp"
#include "oracles/brute_force.hpp"
#include "support.hpp"

using namespace etv;

namespace {

Instance ok_instance() {
  Instance inst;
  for (int i = 0; i < 3; ++i) inst.users.push_back({i, {}, 1});
  inst.funds.push_back({0, {}, 0, 1});
  inst.funds.push_back({1, {}, 1, 2});
  return inst;
}

bool has_kind(const Violations& v, ErrorKind kind) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.kind == kind; });
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("etv_core_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("validate_instance examples") {
  CHECK(validate_instance(ok_instance()).empty());

  Instance mismatch = ok_instance();
  mismatch.funds[1].demand = 1;
  CHECK(has_kind(validate_instance(mismatch), ErrorKind::DemandMismatch));

  Instance stuck;
  stuck.users = {{0, {}, 0}, {1, {}, 0}};
  stuck.funds = {{0, {}, 1, 2}, {1, {}, 0, 0}};
  CHECK(has_kind(validate_instance(stuck), ErrorKind::Infeasible));
}

TEST_CASE("validate_instance rejects bad shapes") {
  Instance inst = ok_instance();
  inst.users[2].id = 7;
  CHECK(has_kind(validate_instance(inst), ErrorKind::ShapeError));

  inst = ok_instance();
  inst.user_feature_dim = 2;
  CHECK(has_kind(validate_instance(inst), ErrorKind::ShapeError));

  inst = ok_instance();
  inst.funds[0].demand = -1;
  inst.funds[1].demand = 4;
  CHECK_FALSE(validate_instance(inst).empty());

  inst = ok_instance();
  inst.users[0].risk_tolerance = kDefaultMaxRiskLevel + 1;
  CHECK_FALSE(validate_instance(inst).empty());
}

TEST_CASE("validate_plan examples") {
  const Instance inst = ok_instance();
  CHECK(validate_plan(inst, {{0, 1, 1}}).empty());
  CHECK(has_kind(validate_plan(inst, {{0, 0, 1}}), ErrorKind::DemandViolation));
  CHECK(has_kind(validate_plan(inst, {{0, 1}}), ErrorKind::ShapeError));
  CHECK(has_kind(validate_plan(inst, {{0, 1, 2}}), ErrorKind::ShapeError));

  Instance risky = ok_instance();
  risky.users[1].risk_tolerance = 0;
  CHECK(has_kind(validate_plan(risky, {{0, 1, 1}}), ErrorKind::RiskViolation));

  CHECK_THROWS_AS(throw_if_any(validate_plan(inst, {{1, 1, 1}})), Error);
  CHECK_NOTHROW(throw_if_any(validate_plan(inst, {{1, 0, 1}})));
}

TEST_CASE("validate_plan catches one injected violation in random valid plans") {
  std::mt19937_64 rng(11);
  int checked = 0;
  while (checked < 200) {
    Instance inst = testing::random_instance(rng, 7, 3);
    std::vector<int> plan;
    oracle::for_each_feasible_plan(inst, [&](const std::vector<int>& a) {
      if (plan.empty()) plan = a;
    });
    if (plan.empty()) continue;
    ++checked;
    REQUIRE(validate_plan(inst, {plan}).empty());

    // Move one user to another fund: breaks a demand, maybe also risk.
    std::vector<int> moved = plan;
    const std::size_t u = rng() % moved.size();
    moved[u] = (moved[u] + 1 + static_cast<int>(rng() % 2)) % 3;
    const Violations v = validate_plan(inst, {moved});
    CHECK(has_kind(v, ErrorKind::DemandViolation));
    if (inst.users[u].risk_tolerance < inst.funds[moved[u]].risk_level) CHECK(has_kind(v, ErrorKind::RiskViolation));
  }
}

TEST_CASE("objective examples and permutation invariance") {
  const EtvMatrix etv(3, 2, {5, 1, 4, 3, 2, 2});
  CHECK(objective(etv, {{0, 1, 1}}) == 10.0);
  CHECK(objective(etv, {{1, 0, 1}}) == 7.0);
  CHECK(objective(EtvMatrix(3, 2), {{1, 0, 1}}) == 0.0);
  CHECK_THROWS_AS(objective(etv, {{0, 1}}), Error);

  const EtvMatrix swapped(3, 2, {2, 2, 5, 1, 4, 3});
  CHECK(objective(swapped, {{1, 0, 1}}) == 10.0);
}

TEST_CASE("feasibility agrees with brute force") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    const std::size_t k = 1 + rng() % 3;
    const Instance inst = testing::random_instance(rng, n, k);
    CHECK(is_feasible(inst) == oracle::brute_force_feasible(inst));
    CHECK(validate_instance(inst).empty() == oracle::brute_force_feasible(inst));
  }
}

TEST_CASE("EtvMatrix rejects negative and non-finite entries") {
  CHECK_THROWS_AS(EtvMatrix(1, 2, {1.0, -0.5}), Error);
  CHECK_THROWS_AS(EtvMatrix(1, 2, {1.0}), Error);
  EtvMatrix m(1, 1);
  CHECK_THROWS_AS(m.set(0, 0, std::nan("")), Error);
  CHECK(m.scaled(3.0) == m);
}

TEST_CASE("observation invariant") {
  CHECK_NOTHROW(check_observation({0, 0, true, 2.0}));
  CHECK_NOTHROW(check_observation({0, 0, false, 0.0}));
  CHECK_THROWS_AS(check_observation({0, 0, true, 0.0}), Error);
  CHECK_THROWS_AS(check_observation({0, 0, false, 1.0}), Error);
  const Observation o{0, 0, true, std::exp(1.0) - 1.0};
  CHECK(o.log_label() == doctest::Approx(1.0));
  CHECK(o.shifted_amount() == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("max flow on a small network") {
  MaxFlow f(4);
  const int a = f.add_edge(0, 1, 3);
  f.add_edge(0, 2, 2);
  f.add_edge(1, 2, 5);
  f.add_edge(1, 3, 2);
  f.add_edge(2, 3, 3);
  CHECK(f.solve(0, 3) == 5);
  CHECK(f.flow_on(a) == 3);
}

TEST_CASE("derive_seed separates stages and indices") {
  CHECK(derive_seed(1, SeedStage::Shuffle, 0) != derive_seed(1, SeedStage::Shuffle, 1));
  CHECK(derive_seed(1, SeedStage::Shuffle, 0) != derive_seed(1, SeedStage::Split, 0));
  CHECK(derive_seed(1, SeedStage::Shuffle, 0) != derive_seed(2, SeedStage::Shuffle, 0));
  static_assert(derive_seed(kDefaultSeed, SeedStage::Replicate, 3) == derive_seed(kDefaultSeed, SeedStage::Replicate, 3));
  // SplitMix64 reference output for state 0.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("csv doubles round-trip") {
  for (double x : {0.0, 1.0, 0.1, 1e-300, 123456789.123456789, 2.0 / 3.0, 14901.0}) {
    CHECK(csv::parse_double(csv::format_double(x), "x") == x);
  }
  CHECK_THROWS_AS(csv::parse_double("1.5x", "x"), Error);
  CHECK_THROWS_AS(csv::parse_int("", "x"), Error);
}

TEST_CASE("csv files round-trip") {
  const auto dir = scratch("roundtrip");
  Instance inst = ok_instance();
  inst.user_feature_dim = 2;
  inst.fund_feature_dim = 1;
  for (auto& u : inst.users) u.features = {0.25 * u.id, -1.0 / 3.0};
  for (auto& f : inst.funds) f.features = {1e-7 * (f.id + 1)};
  csv::write_instance(dir, inst);
  const Instance back = csv::read_instance(dir);
  REQUIRE(back.num_users() == 3);
  CHECK(back.users[1].features == inst.users[1].features);
  CHECK(back.funds[1].features == inst.funds[1].features);
  CHECK(back.funds[1].demand == 2);
  CHECK(back.user_feature_dim == 2);

  const std::vector<Observation> obs{{0, 1, true, 12.5}, {2, 0, false, 0.0}};
  csv::write_observations(dir / "obs.csv", obs);
  CHECK(csv::read_observations(dir / "obs.csv") == obs);

  const EtvMatrix etv(3, 2, {5, 1, 4, 3.25, 2, 1.0 / 7.0});
  csv::write_etv(dir / "etv.csv", etv);
  CHECK(csv::read_etv(dir / "etv.csv") == etv);

  const AllocationPlan plan{{0, 1, 1}};
  csv::write_plan(dir / "plan.csv", plan);
  CHECK(csv::read_plan(dir / "plan.csv") == plan);
}

TEST_CASE("csv readers report bad input") {
  const auto dir = scratch("bad");
  CHECK_THROWS_AS(csv::read_table(dir / "missing.csv"), Error);
  {
    std::ofstream(dir / "plan.csv") << "user_id,fund_id\n0,1\n0,0\n";
  }
  CHECK_THROWS_AS(csv::read_plan(dir / "plan.csv"), Error);
  {
    std::ofstream(dir / "obs.csv") << "user_id,fund_id,converted,amount\n0,0,1,0\n";
  }
  CHECK_THROWS_AS(csv::read_observations(dir / "obs.csv"), Error);
  {
    std::ofstream(dir / "crlf.csv") << "a,b\r\n1,2\r\n";
  }
  const csv::Table t = csv::read_table(dir / "crlf.csv");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  CHECK(t.rows.at(0).at(1) == "2");
}
