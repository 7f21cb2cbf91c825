#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fbbai/net.hpp"

namespace fbbai {

struct TrainConfig {
  int k = 3;
  Family family = Family::kBernoulli;
  double sigma = 1.0;
  // Sampling box for both true means and empirical vectors. Bernoulli
  // defaults to [0,1]; Gaussian has no canonical box and must set one.
  double box_lo = 0.0;
  double box_hi = 1.0;
  Complexity h{ComplexityKind::kH1, 1.0};

  int n_true = 32;  // true instances scanned per iteration
  int n_emp = 90;   // empirical vectors per optimal-arm class
  int iters = 20000;
  int checkpoint_every = 200;
  int eval_true = 32;       // checkpoint-selection set sizes
  int eval_emp = 100000;    // empirical vectors per class in the eval set
  // Sort sampled true means descending so one empirical batch serves every
  // instance in the scan (all share optimal-arm class after sorting).
  bool sort_true = true;
  bool share_q_per_class = true;

  std::uint64_t seed = 1;
  std::string progress_csv;     // per-iteration log; empty disables
  int rejection_cap = 2000000;  // attempts before sampling gives up
};

void validate_config(const TrainConfig& cfg);

// True means: K iid uniforms over the box, optionally sorted descending,
// resampled until the best arm is unique.
std::vector<double> sample_true(Xoshiro256& rng, const TrainConfig& cfg);

// Best-arm sets of q and p are disjoint.
bool is_adversarial_pair(const std::vector<double>& q, const std::vector<double>& p);

// Uniform over the box conditioned on disjoint best-arm sets, by rejection.
// Throws std::runtime_error when the acceptance cap is exhausted.
std::vector<double> sample_adversarial_q(Xoshiro256& rng, const TrainConfig& cfg,
                                         const std::vector<double>& p);

struct StepInfo {
  double e_min = 0.0;
  std::vector<double> p_min, q_min;
};

// One iteration: sample n_true instances and their adversarial empirical
// batches, scan every pair for the minimum of the rate objective, take one
// AdamW step on that pair's gradient. Scan order (instance-major) breaks
// ties, so the step is deterministic.
StepInfo train_step(NetParams& params, AdamW& opt, const TrainConfig& cfg,
                    Xoshiro256& rng);

// Fixed evaluation set for checkpoint selection: eval_true instances plus
// one adversarial pool per optimal-arm class present among them.
struct EvalSet {
  std::vector<std::vector<double>> p;
  std::vector<int> p_class;                            // best arm of each p
  std::vector<std::vector<std::vector<double>>> pool;  // pool[class][j]
};

EvalSet make_eval_set(const TrainConfig& cfg, std::uint64_t seed);

// min over eval pairs of the rate objective under the network's allocation.
double eval_min_loss(const NetParams& params, const TrainConfig& cfg, const EvalSet& set);
// Same minimum under a fixed allocation (the uniform-baseline comparator).
double eval_min_loss_fixed(const std::vector<double>& r, const TrainConfig& cfg,
                           const EvalSet& set);

// Index of the checkpoint maximizing the eval minimum; earliest wins ties.
int select_checkpoint(const std::vector<double>& scores);

struct TrainResult {
  Checkpoint selected;
  int selected_index = 0;
  std::vector<double> checkpoint_scores;
  std::vector<std::int64_t> checkpoint_iters;
};

// Full run: He init from seed, iterate, snapshot every checkpoint_every
// iterations plus once at the end, select by eval minimum. Bitwise
// reproducible for a fixed config.
TrainResult train(const TrainConfig& cfg);

}  // namespace fbbai
