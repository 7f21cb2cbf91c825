#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fbbai/bandit.hpp"
#include "fbbai/divergence.hpp"
#include "fbbai/policy.hpp"

namespace fbbai {

struct ExperimentConfig {
  BanditInstance instance;
  std::string policy_spec = "uniform";
  std::int64_t t_budget = 2000;
  std::int64_t n_trials = 100000;
  std::uint64_t seed = 1;
  int n_checkpoints = 50;   // evenly spaced rounds, last one at t_budget
  bool collect_disc = false;  // tracking-error stats (tracking policies only)
  int threads = 1;
  double oracle_grid_step = 0.0;  // > 0: compute the oracle exponent line
};

struct CheckpointStats {
  std::int64_t t = 0;
  std::int64_t errors = 0;  // recommendation outside the best-arm set
  double poe = 0.0;
  double poe_stderr = 0.0;
  double disc_avg = 0.0;
  double disc_worst = 0.0;
  double disc_fail_avg = 0.0;  // mean disc over trials that end in error
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CheckpointStats> checkpoints;
  std::int64_t aborted = 0;      // trials killed by a policy error
  double oracle_exponent = 0.0;  // filled when oracle_grid_step > 0
  bool has_oracle = false;
};

// n_trials seeded independent trials. Per-trial substreams make the report
// identical for any thread count; trials are reduced in fixed-size blocks
// merged in block order.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Exact error probability by depth-first enumeration of all reward
// sequences (Bernoulli only). Branches only on non-degenerate rewards, so
// degenerate instances enumerate in linear time. T above 20 throws.
double exact_poe(const Policy& prototype, const BanditInstance& instance,
                 std::int64_t t_budget);

struct RateFit {
  double slope = 0.0;   // OLS slope of log poe vs t (negative when decaying)
  double decay = 0.0;   // -slope
  double rate = 0.0;    // H(p) * decay
  double stderr_slope = 0.0;
  int points = 0;
};

// Fits the trailing half of the checkpoints; zero-PoE points are dropped
// and fewer than 3 surviving points throw (insufficient failures).
RateFit empirical_rate(const std::vector<CheckpointStats>& curve, double h_value);

// CSV (t, poe, poe_stderr, disc_avg, disc_worst, disc_fail) at 17
// significant digits plus a <path>.meta.json sidecar carrying the config
// and a git-blob-style content hash of the CSV. Byte-deterministic.
void emit_report(const ExperimentReport& report, const std::string& csv_path);

}  // namespace fbbai
