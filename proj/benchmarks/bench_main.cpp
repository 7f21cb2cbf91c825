#include <benchmark/benchmark.h>

#include <vector>

#include "fbbai/divergence.hpp"
#include "fbbai/dot.hpp"
#include "fbbai/harness.hpp"
#include "fbbai/net.hpp"
#include "fbbai/policy.hpp"
#include "fbbai/rates.hpp"

namespace {

using namespace fbbai;

void BM_KlBernoulli(benchmark::State& state) {
  double q = 0.475;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kl_bernoulli(q, 0.5));
    q = q == 0.475 ? 0.3 : 0.475;
  }
}
BENCHMARK(BM_KlBernoulli);

void BM_NetForward(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const NetParams params = he_init(k, 7);
  NetWorkspace ws;
  std::vector<double> q(k), r(k);
  for (int i = 0; i < k; ++i) q[i] = 0.3 + 0.01 * i;
  for (auto _ : state) {
    net_forward(params, std::span<const double>(q), std::span<double>(r), ws);
    benchmark::DoNotOptimize(r.data());
  }
}
BENCHMARK(BM_NetForward)->Arg(3)->Arg(8);

void BM_TrackingStep(benchmark::State& state) {
  const int k = 3;
  const auto source = std::make_shared<FixedSource>(std::vector<double>{0.5, 0.3, 0.2});
  const auto policy = make_tracking_policy(source);
  policy->reset(k, 1 << 30);
  EmpiricalState st;
  st.reset(k);
  std::int64_t tick = 0;
  for (auto _ : state) {
    const int arm = policy->choose_arm(st);
    st.update(arm, (tick++ & 1) ? 1.0 : 0.0);
    benchmark::DoNotOptimize(arm);
  }
}
BENCHMARK(BM_TrackingStep);

void BM_DotRun(benchmark::State& state) {
  const BanditInstance p = make_bernoulli({0.5, 0.45, 0.3});
  const ConstantBatchRule rule(4, {0.4, 0.35, 0.25});
  std::uint64_t trial = 0;
  for (auto _ : state) {
    RewardStream stream(11, trial++, p.k());
    const DotTrace trace = run_dot(rule, p, 2000, stream);
    benchmark::DoNotOptimize(trace.recommendation);
  }
}
BENCHMARK(BM_DotRun);

void BM_OracleExponent(benchmark::State& state) {
  const BanditInstance p = make_bernoulli({0.5, 0.45, 0.3});
  const FixedSource source({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const GridSpec grid = uniform_grid(3, 0.0, 1.0, 0.05);
  for (auto _ : state)
    benchmark::DoNotOptimize(oracle_exponent(source, p, grid));
}
BENCHMARK(BM_OracleExponent);

}  // namespace

BENCHMARK_MAIN();
