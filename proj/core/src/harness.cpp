#include "fbbai/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "fbbai/io.hpp"
#include "fbbai/rates.hpp"

namespace fbbai {

namespace {

// Trials are partitioned into fixed-size blocks; partial results merge in
// block order, which makes the report independent of the thread count.
constexpr std::int64_t kBlockTrials = 256;

struct BlockAccum {
  std::int64_t completed = 0;
  std::int64_t aborted = 0;
  std::vector<std::int64_t> errors;
  std::vector<double> disc_sum;
  std::vector<double> disc_max;
  std::vector<double> disc_fail_sum;

  void resize(std::size_t n) {
    errors.assign(n, 0);
    disc_sum.assign(n, 0.0);
    disc_max.assign(n, 0.0);
    disc_fail_sum.assign(n, 0.0);
  }

  void merge(const BlockAccum& o) {
    completed += o.completed;
    aborted += o.aborted;
    for (std::size_t j = 0; j < errors.size(); ++j) {
      errors[j] += o.errors[j];
      disc_sum[j] += o.disc_sum[j];
      disc_max[j] = std::max(disc_max[j], o.disc_max[j]);
      disc_fail_sum[j] += o.disc_fail_sum[j];
    }
  }
};

std::vector<std::int64_t> checkpoint_rounds(std::int64_t t_budget, int n_checkpoints) {
  std::vector<std::int64_t> rounds;
  for (int j = 1; j <= n_checkpoints; ++j) {
    const std::int64_t t =
        (static_cast<std::int64_t>(j) * t_budget + n_checkpoints - 1) / n_checkpoints;
    if (rounds.empty() || rounds.back() != t) rounds.push_back(std::max<std::int64_t>(1, t));
  }
  return rounds;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  validate_instance(config.instance);
  const int k = config.instance.k();
  if (config.t_budget < k) throw std::invalid_argument("experiment: T below K");
  if (config.n_trials < 1) throw std::invalid_argument("experiment: no trials");
  if (config.n_checkpoints < 1) throw std::invalid_argument("experiment: no checkpoints");
  if (config.threads < 1) throw std::invalid_argument("experiment: bad thread count");

  const std::unique_ptr<Policy> prototype = make_policy(config.policy_spec, k);
  std::shared_ptr<const AllocationSource> source;
  if (config.collect_disc || config.oracle_grid_step > 0.0) {
    source = policy_source(config.policy_spec, k);
    if (config.collect_disc && !source)
      throw std::invalid_argument("experiment: disc stats need a tracking policy");
  }

  ExperimentReport report;
  report.config = config;
  if (config.oracle_grid_step > 0.0) {
    if (!source)
      throw std::invalid_argument("experiment: oracle line needs a tracking policy");
    if (config.instance.family != Family::kBernoulli)
      throw std::invalid_argument("experiment: oracle grid is defined for Bernoulli");
    const GridSpec grid = uniform_grid(k, 0.0, 1.0, config.oracle_grid_step);
    report.oracle_exponent = oracle_exponent(*source, config.instance, grid);
    report.has_oracle = true;
  }

  const std::vector<std::int64_t> rounds =
      checkpoint_rounds(config.t_budget, config.n_checkpoints);
  const std::size_t ncp = rounds.size();

  const std::int64_t n_blocks = (config.n_trials + kBlockTrials - 1) / kBlockTrials;
  std::vector<BlockAccum> blocks(static_cast<std::size_t>(n_blocks));

  const auto run_block = [&](std::int64_t block) {
    BlockAccum acc;
    acc.resize(ncp);
    std::vector<char> trial_err(ncp);
    std::vector<double> trial_disc(ncp);
    const std::int64_t lo = block * kBlockTrials;
    const std::int64_t hi = std::min(config.n_trials, lo + kBlockTrials);
    for (std::int64_t trial = lo; trial < hi; ++trial) {
      std::unique_ptr<Policy> policy = prototype->clone();
      EmpiricalState state;
      RewardStream stream(config.seed, static_cast<std::uint64_t>(trial), k);
      bool ok = true;
      try {
        policy->reset(k, config.t_budget);
        state.reset(k);
        std::size_t cp = 0;
        for (std::int64_t t = 1; t <= config.t_budget; ++t) {
          const int arm = policy->choose_arm(state);
          if (arm < 0 || arm >= k) throw std::logic_error("policy chose a bad arm");
          state.update(arm, stream.draw(config.instance, arm));
          if (cp < ncp && t == rounds[cp]) {
            const int rec = policy->recommend(state);
            trial_err[cp] = is_error(config.instance.means, rec) ? 1 : 0;
            trial_disc[cp] =
                config.collect_disc ? tracking_error(*source, state) : 0.0;
            ++cp;
          }
        }
      } catch (const std::exception&) {
        ok = false;
      }
      if (!ok) {
        ++acc.aborted;
        continue;
      }
      ++acc.completed;
      for (std::size_t j = 0; j < ncp; ++j) {
        if (trial_err[j]) {
          ++acc.errors[j];
          acc.disc_fail_sum[j] += trial_disc[j];
        }
        acc.disc_sum[j] += trial_disc[j];
        acc.disc_max[j] = std::max(acc.disc_max[j], trial_disc[j]);
      }
    }
    blocks[static_cast<std::size_t>(block)] = std::move(acc);
  };

  const int threads = std::min<std::int64_t>(config.threads, n_blocks);
  if (threads <= 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::int64_t b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1))
          run_block(b);
      });
    }
    for (auto& th : pool) th.join();
  }

  BlockAccum total;
  total.resize(ncp);
  for (const BlockAccum& acc : blocks) total.merge(acc);

  report.aborted = total.aborted;
  report.checkpoints.resize(ncp);
  for (std::size_t j = 0; j < ncp; ++j) {
    CheckpointStats& cs = report.checkpoints[j];
    cs.t = rounds[j];
    cs.errors = total.errors[j];
    if (total.completed > 0) {
      const double n = static_cast<double>(total.completed);
      cs.poe = static_cast<double>(total.errors[j]) / n;
      cs.poe_stderr = std::sqrt(cs.poe * (1.0 - cs.poe) / n);
      cs.disc_avg = total.disc_sum[j] / n;
    }
    cs.disc_worst = total.disc_max[j];
    cs.disc_fail_avg =
        total.errors[j] > 0
            ? total.disc_fail_sum[j] / static_cast<double>(total.errors[j])
            : 0.0;
  }
  return report;
}

namespace {

double enumerate_poe(Policy& policy, EmpiricalState& state, const BanditInstance& p,
                     std::int64_t t, std::int64_t t_budget, double prob) {
  if (t == t_budget) return is_error(p.means, policy.recommend(state)) ? prob : 0.0;
  const int arm = policy.choose_arm(state);
  if (arm < 0 || arm >= p.k()) throw std::logic_error("policy chose a bad arm");
  const double mu = p.means[arm];
  double mass = 0.0;
  // The schedule state after choose_arm is shared by both branches, so the
  // success branch runs on a clone and the failure branch reuses this one.
  if (mu > 0.0) {
    std::unique_ptr<Policy> branch = policy.clone();
    EmpiricalState s1 = state;
    s1.update(arm, 1.0);
    mass += enumerate_poe(*branch, s1, p, t + 1, t_budget, prob * mu);
  }
  if (mu < 1.0) {
    state.update(arm, 0.0);
    mass += enumerate_poe(policy, state, p, t + 1, t_budget, prob * (1.0 - mu));
  }
  return mass;
}

}  // namespace

double exact_poe(const Policy& prototype, const BanditInstance& instance,
                 std::int64_t t_budget) {
  validate_instance(instance);
  if (instance.family != Family::kBernoulli)
    throw std::invalid_argument("exact enumeration: Bernoulli only");
  if (t_budget < 1) throw std::invalid_argument("exact enumeration: T below 1");
  if (t_budget > 20) throw std::length_error("exact enumeration: T above 20");
  std::unique_ptr<Policy> policy = prototype.clone();
  policy->reset(instance.k(), t_budget);
  EmpiricalState state;
  state.reset(instance.k());
  return enumerate_poe(*policy, state, instance, 0, t_budget, 1.0);
}

RateFit empirical_rate(const std::vector<CheckpointStats>& curve, double h_value) {
  if (curve.empty()) throw std::invalid_argument("rate fit: empty curve");
  std::vector<double> xs, ys;
  for (std::size_t j = curve.size() / 2; j < curve.size(); ++j) {
    if (curve[j].poe <= 0.0) continue;  // zero failures carry no slope information
    xs.push_back(static_cast<double>(curve[j].t));
    ys.push_back(std::log(curve[j].poe));
  }
  if (xs.size() < 3)
    throw std::runtime_error("rate fit: insufficient failures in range; more trials needed");

  const std::size_t m = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("rate fit: degenerate checkpoint times");

  RateFit fit;
  fit.points = static_cast<int>(m);
  fit.slope = sxy / sxx;
  fit.decay = -fit.slope;
  fit.rate = h_value * fit.decay;
  double ssr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = ys[i] - (my + fit.slope * (xs[i] - mx));
    ssr += e * e;
  }
  fit.stderr_slope = m > 2 ? std::sqrt(ssr / static_cast<double>(m - 2) / sxx) : 0.0;
  return fit;
}

void emit_report(const ExperimentReport& report, const std::string& csv_path) {
  std::string csv = "t,poe,poe_stderr,disc_avg,disc_worst,disc_fail\n";
  char row[256];
  for (const CheckpointStats& cs : report.checkpoints) {
    std::snprintf(row, sizeof(row), "%lld,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(cs.t), cs.poe, cs.poe_stderr, cs.disc_avg,
                  cs.disc_worst, cs.disc_fail_avg);
    csv += row;
  }
  write_file(csv_path, csv);

  nlohmann::ordered_json meta;
  nlohmann::ordered_json cfg;
  cfg["family"] = family_name(report.config.instance.family);
  if (report.config.instance.family == Family::kGaussian)
    cfg["sigma"] = report.config.instance.sigma;
  cfg["means"] = report.config.instance.means;
  cfg["policy"] = report.config.policy_spec;
  cfg["t_budget"] = report.config.t_budget;
  cfg["n_trials"] = report.config.n_trials;
  cfg["seed"] = report.config.seed;
  cfg["n_checkpoints"] = report.config.n_checkpoints;
  cfg["collect_disc"] = report.config.collect_disc;
  cfg["threads"] = report.config.threads;
  cfg["oracle_grid_step"] = report.config.oracle_grid_step;
  meta["config"] = cfg;
  meta["aborted"] = report.aborted;
  if (report.has_oracle) meta["oracle_exponent"] = report.oracle_exponent;
  meta["content_hash"] = git_blob_hash(csv);
  write_file(csv_path + ".meta.json", meta.dump(2) + "\n");
}

}  // namespace fbbai
