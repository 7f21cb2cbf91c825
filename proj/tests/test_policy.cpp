#include <doctest.h>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

#include "fbbai/bandit.hpp"
#include "fbbai/net.hpp"
#include "fbbai/policy.hpp"
#include "fbbai/rng.hpp"

using namespace fbbai;

namespace {

// Drives a policy for T rounds with deterministic per-arm rewards and returns
// the final pull counts.
std::vector<std::int64_t> run_counts(Policy& pol, int k, std::int64_t t_budget,
                                     const std::vector<double>& reward_by_arm,
                                     EmpiricalState* out_state = nullptr) {
  pol.reset(k, t_budget);
  EmpiricalState state;
  state.reset(k);
  for (std::int64_t t = 0; t < t_budget; ++t) {
    const int arm = pol.choose_arm(state);
    REQUIRE(arm >= 0);
    REQUIRE(arm < k);
    state.update(arm, reward_by_arm[arm]);
  }
  if (out_state) *out_state = state;
  return state.counts;
}

}  // namespace

TEST_CASE("fixed source copies its allocation and validates it") {
  const FixedSource src({0.5, 0.3, 0.2});
  CHECK(src.k() == 3);
  const std::vector<double> r = src.allocation_of({0.9, 0.1, 0.4});
  CHECK(r == std::vector<double>{0.5, 0.3, 0.2});
  CHECK_THROWS_AS(FixedSource({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(FixedSource({0.5, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(FixedSource({1.5, -0.5}), std::invalid_argument);
}

TEST_CASE("network source matches the bare forward pass") {
  const NetParams params = he_init(3, 5);
  const NetworkSource src(params);
  const std::vector<double> q{0.3, 0.6, 0.1};
  CHECK(src.allocation_of(q) == net_forward(params, q));
  std::vector<double> wrong(2);
  CHECK_THROWS_AS(src.allocation(std::span<const double>(q), std::span<double>(wrong)),
                  std::invalid_argument);
}

TEST_CASE("table source interpolates, is exact on nodes, and clamps") {
  // 2x2 lattice over [0,1]^2, row-major with arm 0 most significant.
  const std::vector<std::vector<double>> grids{{0.0, 1.0}, {0.0, 1.0}};
  const std::vector<std::vector<double>> table{
      {1.0, 0.0}, {0.5, 0.5}, {0.5, 0.5}, {0.25, 0.75}};
  const TableSource src(grids, table);
  CHECK(src.k() == 2);

  CHECK(src.allocation_of({0.0, 0.0}) == table[0]);
  CHECK(src.allocation_of({0.0, 1.0}) == table[1]);
  CHECK(src.allocation_of({1.0, 1.0}) == table[3]);

  // Center of the cell: plain average of the four corner rows.
  const std::vector<double> mid = src.allocation_of({0.5, 0.5});
  CHECK(mid[0] == doctest::Approx(0.5625).epsilon(1e-15));
  CHECK(mid[1] == doctest::Approx(0.4375).epsilon(1e-15));

  // Outside the box the nearest node applies.
  CHECK(src.allocation_of({-3.0, 7.0}) == table[1]);

  CHECK_THROWS_AS(
      TableSource({{0.0, 1.0}}, {{0.5, 0.5}, {0.5, 0.5}}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      TableSource({{0.0, 1.0}, {1.0, 0.0}},
                  {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      TableSource({{0.0, 1.0}, {0.0, 1.0}}, {{0.5, 0.5}}),
      std::invalid_argument);
}

TEST_CASE("uniform policy cycles arms and recommends the empirical best") {
  auto pol = make_uniform_policy();
  EmpiricalState state;
  const auto counts = run_counts(*pol, 3, 10, {0.0, 1.0, 0.0}, &state);
  CHECK(counts == std::vector<std::int64_t>{4, 3, 3});
  CHECK(pol->recommend(state) == 1);

  EmpiricalState fresh;
  fresh.reset(3);
  CHECK(pol->recommend(fresh) == 0);  // nothing pulled yet: lowest arm

  CHECK_THROWS_AS(pol->reset(1, 10), std::invalid_argument);
  CHECK_THROWS_AS(pol->reset(3, 0), std::invalid_argument);
}

TEST_CASE("successive rejects follows its elimination schedule") {
  auto pol = make_successive_rejects_policy();

  EmpiricalState state;
  auto counts = run_counts(*pol, 3, 2000, {1.0, 0.0, 0.0}, &state);
  CHECK(counts == std::vector<std::int64_t>{750, 750, 500});
  CHECK(pol->recommend(state) == 0);

  counts = run_counts(*pol, 3, 7, {1.0, 0.0, 0.0});
  CHECK(counts == std::vector<std::int64_t>{3, 3, 1});

  // A mid-run recommendation only considers surviving arms.
  pol->reset(3, 2000);
  EmpiricalState mid;
  mid.reset(3);
  for (int t = 0; t < 1600; ++t) {
    const int arm = pol->choose_arm(mid);
    mid.update(arm, arm == 2 ? 0.4 : (arm == 0 ? 1.0 : 0.6));
  }
  CHECK(pol->recommend(mid) == 0);

  CHECK_THROWS_AS(pol->reset(3, 3), std::invalid_argument);
  CHECK_THROWS_AS(pol->reset(1, 100), std::invalid_argument);
}

TEST_CASE("sequential halving follows its round schedule") {
  auto pol = make_sequential_halving_policy();

  EmpiricalState state;
  auto counts = run_counts(*pol, 3, 2000, {1.0, 0.0, 0.0}, &state);
  CHECK(counts == std::vector<std::int64_t>{834, 833, 333});
  CHECK(pol->recommend(state) == 0);

  counts = run_counts(*pol, 4, 800, {1.0, 0.0, 0.0, 0.0});
  CHECK(counts == std::vector<std::int64_t>{300, 300, 100, 100});

  // Needs K * ceil(log2 K) rounds of at least one pull per arm.
  CHECK_THROWS_AS(pol->reset(3, 5), std::invalid_argument);
  CHECK(pol->clone()->name() == "sh");
}

TEST_CASE("tracking pulls every arm once, then chases the deficit") {
  auto src = std::make_shared<FixedSource>(std::vector<double>{0.5, 0.3, 0.2});
  auto pol = make_tracking_policy(src);
  pol->reset(3, 100);

  EmpiricalState state;
  state.reset(3);
  CHECK(pol->choose_arm(state) == 0);
  state.update(0, 1.0);
  CHECK(pol->choose_arm(state) == 1);
  state.update(1, 0.0);
  CHECK(pol->choose_arm(state) == 2);
  state.update(2, 0.0);

  // t=3, N=(1,1,1): deficits r_i - 1/3 peak at arm 0.
  CHECK(pol->choose_arm(state) == 0);

  CHECK_THROWS_AS(pol->reset(2, 100), std::invalid_argument);
  CHECK_THROWS_AS(make_tracking_policy(nullptr), std::invalid_argument);
}

TEST_CASE("tracking a fixed allocation stays within K/t of it") {
  const std::vector<double> target{0.5, 0.3, 0.2};
  auto src = std::make_shared<FixedSource>(target);
  auto pol = make_tracking_policy(src);
  pol->reset(3, 200);

  const BanditInstance inst = make_bernoulli({0.5, 0.45, 0.3});
  RewardStream stream(9, 0, 3);
  EmpiricalState state;
  state.reset(3);
  for (int t = 0; t < 200; ++t) {
    const int arm = pol->choose_arm(state);
    state.update(arm, stream.draw(inst, arm));
    if (state.t > 3) {
      const double disc = tracking_error(*src, state);
      CHECK(disc <= 3.0 / static_cast<double>(state.t) + 1e-12);
    }
  }
}

TEST_CASE("tracking error is the worst allocation deviation") {
  const FixedSource src({0.5, 0.3, 0.2});
  EmpiricalState state;
  state.reset(3);
  state.update(0, 1.0);
  state.update(0, 0.0);
  state.update(1, 1.0);
  state.update(2, 0.0);
  // N/t = (0.5, 0.25, 0.25): deviations (0, 0.05, 0.05).
  CHECK(tracking_error(src, state) == doctest::Approx(0.05).epsilon(1e-12));

  EmpiricalState empty;
  empty.reset(3);
  CHECK_THROWS_AS((void)tracking_error(src, empty), std::invalid_argument);
}

TEST_CASE("policy factory parses specs and rejects junk") {
  CHECK(make_policy("uniform", 3)->name() == "uniform");
  CHECK(make_policy("sr", 3)->name() == "sr");
  CHECK(make_policy("sh", 3)->name() == "sh");
  CHECK(make_policy("fixed:0.5,0.3,0.2", 3)->name() == "tracking:fixed");

  CHECK(policy_source("uniform", 3) == nullptr);
  CHECK(policy_source("sr", 3) == nullptr);
  auto src = policy_source("fixed:0.25,0.75", 2);
  REQUIRE(src != nullptr);
  CHECK(src->allocation_of({0.4, 0.6}) == std::vector<double>{0.25, 0.75});

  CHECK_THROWS_AS((void)make_policy("bogus", 3), std::invalid_argument);
  CHECK_THROWS_AS((void)make_policy("fixed:0.5,0.5", 3), std::invalid_argument);
  CHECK_THROWS_AS((void)make_policy("fixed:0.5,nope", 2), std::invalid_argument);
  CHECK_THROWS_AS((void)make_policy("tnn:no_such_file.json", 3), std::runtime_error);
}

TEST_CASE("policy clones are independent mid-run") {
  auto pol = make_successive_rejects_policy();
  pol->reset(3, 7);
  EmpiricalState state;
  state.reset(3);
  for (int t = 0; t < 3; ++t) {
    const int arm = pol->choose_arm(state);
    state.update(arm, arm == 0 ? 1.0 : 0.0);
  }
  auto copy = pol->clone();
  // Both continue from the same schedule position and stay in lockstep.
  for (int t = 3; t < 7; ++t) {
    const int a = pol->choose_arm(state);
    const int b = copy->choose_arm(state);
    CHECK(a == b);
    state.update(a, a == 0 ? 1.0 : 0.0);
  }
  CHECK(state.t == 7);
}
