#include "fbbai/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace fbbai {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Salt separating the eval-set stream from the training stream.
constexpr std::uint64_t kEvalSalt = 0x6576616c5f736574ULL;

double uniform_box(Xoshiro256& rng, const TrainConfig& cfg) {
  return cfg.box_lo + (cfg.box_hi - cfg.box_lo) * rng.uniform01();
}

BanditInstance as_instance(const TrainConfig& cfg, const std::vector<double>& means) {
  BanditInstance inst;
  inst.family = cfg.family;
  inst.means = means;
  inst.sigma = cfg.sigma;
  return inst;
}

// H(p) * sum_i r_i * D(q_i || p_i) for a precomputed allocation.
double pair_loss(const TrainConfig& cfg, double hv, const std::vector<double>& p,
                 const std::vector<double>& q, const std::vector<double>& r) {
  double s = 0.0;
  for (int i = 0; i < cfg.k; ++i) {
    const double d = kl(cfg.family, q[i], p[i], cfg.sigma);
    if (!std::isfinite(d)) return kInf;
    s += r[i] * d;
  }
  return hv * s;
}

}  // namespace

void validate_config(const TrainConfig& cfg) {
  if (cfg.k < 2) throw std::invalid_argument("training needs k >= 2");
  if (!(cfg.box_lo < cfg.box_hi))
    throw std::invalid_argument("sampling box is empty");
  if (cfg.family == Family::kBernoulli && (cfg.box_lo < 0.0 || cfg.box_hi > 1.0))
    throw std::invalid_argument("Bernoulli sampling box must sit inside [0,1]");
  if (cfg.family == Family::kGaussian && !(cfg.sigma > 0.0))
    throw std::invalid_argument("Gaussian sigma must be positive");
  if (cfg.h.kind == ComplexityKind::kConstant && !(cfg.h.constant > 0.0))
    throw std::invalid_argument("constant complexity must be positive");
  if (cfg.n_true < 1 || cfg.n_emp < 1 || cfg.iters < 1)
    throw std::invalid_argument("scan sizes and iteration count must be positive");
  if (cfg.checkpoint_every < 1)
    throw std::invalid_argument("checkpoint interval must be positive");
  if (cfg.eval_true < 1 || cfg.eval_emp < 1)
    throw std::invalid_argument("eval set sizes must be positive");
  if (cfg.rejection_cap < 1)
    throw std::invalid_argument("rejection cap must be positive");
}

std::vector<double> sample_true(Xoshiro256& rng, const TrainConfig& cfg) {
  std::vector<double> means(cfg.k);
  for (int attempt = 0; attempt < cfg.rejection_cap; ++attempt) {
    for (double& m : means) m = uniform_box(rng, cfg);
    if (cfg.sort_true) std::sort(means.begin(), means.end(), std::greater<>());
    if (best_arm_set(means).size() == 1) return means;
  }
  throw std::runtime_error("could not sample a true instance with a unique best arm");
}

bool is_adversarial_pair(const std::vector<double>& q, const std::vector<double>& p) {
  const std::vector<int> bq = best_arm_set(q);
  const std::vector<int> bp = best_arm_set(p);
  // Both sets are ascending; disjointness by merge scan.
  std::size_t i = 0, j = 0;
  while (i < bq.size() && j < bp.size()) {
    if (bq[i] == bp[j]) return false;
    if (bq[i] < bp[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return true;
}

std::vector<double> sample_adversarial_q(Xoshiro256& rng, const TrainConfig& cfg,
                                         const std::vector<double>& p) {
  std::vector<double> q(cfg.k);
  for (int attempt = 0; attempt < cfg.rejection_cap; ++attempt) {
    for (double& v : q) v = uniform_box(rng, cfg);
    if (is_adversarial_pair(q, p)) return q;
  }
  throw std::runtime_error("could not sample an adversarial empirical vector");
}

namespace {

// Sampled material for one scan: instances, their best-arm classes, and one
// empirical batch per class (shared) or per instance.
struct ScanBatch {
  std::vector<std::vector<double>> p;
  std::vector<int> p_class;
  // batch_of[i] indexes batches; shared mode points instances of one class
  // at the same batch.
  std::vector<int> batch_of;
  std::vector<std::vector<std::vector<double>>> batches;
};

ScanBatch sample_scan(Xoshiro256& rng, const TrainConfig& cfg, int n_true, int n_emp) {
  ScanBatch s;
  s.p.reserve(n_true);
  s.p_class.reserve(n_true);
  for (int i = 0; i < n_true; ++i) {
    s.p.push_back(sample_true(rng, cfg));
    s.p_class.push_back(best_arm(s.p.back()));
  }
  s.batch_of.assign(n_true, -1);
  if (cfg.share_q_per_class) {
    // One batch per optimal-arm class present, sampled in class order.
    std::vector<int> batch_for_class(cfg.k, -1);
    for (int c = 0; c < cfg.k; ++c) {
      const auto it = std::find(s.p_class.begin(), s.p_class.end(), c);
      if (it == s.p_class.end()) continue;
      const auto& rep = s.p[static_cast<std::size_t>(it - s.p_class.begin())];
      std::vector<std::vector<double>> batch;
      batch.reserve(n_emp);
      for (int j = 0; j < n_emp; ++j)
        batch.push_back(sample_adversarial_q(rng, cfg, rep));
      batch_for_class[c] = static_cast<int>(s.batches.size());
      s.batches.push_back(std::move(batch));
    }
    for (int i = 0; i < n_true; ++i) s.batch_of[i] = batch_for_class[s.p_class[i]];
  } else {
    for (int i = 0; i < n_true; ++i) {
      std::vector<std::vector<double>> batch;
      batch.reserve(n_emp);
      for (int j = 0; j < n_emp; ++j)
        batch.push_back(sample_adversarial_q(rng, cfg, s.p[i]));
      s.batch_of[i] = static_cast<int>(s.batches.size());
      s.batches.push_back(std::move(batch));
    }
  }
  return s;
}

}  // namespace

StepInfo train_step(NetParams& params, AdamW& opt, const TrainConfig& cfg,
                    Xoshiro256& rng) {
  const ScanBatch scan = sample_scan(rng, cfg, cfg.n_true, cfg.n_emp);

  // The allocation depends on q alone, so forward each batch once and reuse
  // it across every instance sharing that batch.
  NetWorkspace ws;
  std::vector<std::vector<std::vector<double>>> alloc(scan.batches.size());
  for (std::size_t b = 0; b < scan.batches.size(); ++b) {
    alloc[b].reserve(scan.batches[b].size());
    for (const auto& q : scan.batches[b]) {
      std::vector<double> r(cfg.k);
      net_forward(params, q, r, ws);
      alloc[b].push_back(std::move(r));
    }
  }

  StepInfo info;
  info.e_min = kInf;
  int min_i = -1, min_j = -1;
  for (int i = 0; i < cfg.n_true; ++i) {
    const double hv = complexity(cfg.h, scan.p[i]);
    const int b = scan.batch_of[i];
    for (std::size_t j = 0; j < scan.batches[b].size(); ++j) {
      const double e = pair_loss(cfg, hv, scan.p[i], scan.batches[b][j], alloc[b][j]);
      if (e < info.e_min) {
        info.e_min = e;
        min_i = i;
        min_j = static_cast<int>(j);
      }
    }
  }
  if (min_i < 0)
    throw std::runtime_error("every scanned pair had infinite loss");

  info.p_min = scan.p[min_i];
  info.q_min = scan.batches[scan.batch_of[min_i]][min_j];

  // The optimizer descends, so ascent on the worst pair needs the negated
  // gradient; pushing the minimum up is the whole objective.
  NetGrad grad;
  net_backward(params, as_instance(cfg, info.p_min), info.q_min, cfg.h, grad, ws);
  for (std::vector<double>* blk :
       {&grad.w1, &grad.b1, &grad.w2, &grad.b2, &grad.w3, &grad.b3})
    for (double& g : *blk) g = -g;
  opt.update(params, grad);
  return info;
}

EvalSet make_eval_set(const TrainConfig& cfg, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  const ScanBatch scan = sample_scan(rng, cfg, cfg.eval_true, cfg.eval_emp);
  EvalSet set;
  set.p = scan.p;
  set.p_class = scan.p_class;
  set.pool.resize(cfg.k);
  for (int i = 0; i < cfg.eval_true; ++i) {
    auto& slot = set.pool[set.p_class[i]];
    if (slot.empty()) slot = scan.batches[scan.batch_of[i]];
  }
  return set;
}

namespace {

double eval_min_common(const TrainConfig& cfg, const EvalSet& set,
                       const std::vector<std::vector<std::vector<double>>>& alloc) {
  double worst = kInf;
  for (std::size_t i = 0; i < set.p.size(); ++i) {
    const double hv = complexity(cfg.h, set.p[i]);
    const int c = set.p_class[i];
    for (std::size_t j = 0; j < set.pool[c].size(); ++j) {
      const double e = pair_loss(cfg, hv, set.p[i], set.pool[c][j], alloc[c][j]);
      worst = std::min(worst, e);
    }
  }
  return worst;
}

}  // namespace

double eval_min_loss(const NetParams& params, const TrainConfig& cfg, const EvalSet& set) {
  NetWorkspace ws;
  std::vector<std::vector<std::vector<double>>> alloc(set.pool.size());
  for (std::size_t c = 0; c < set.pool.size(); ++c) {
    alloc[c].reserve(set.pool[c].size());
    for (const auto& q : set.pool[c]) {
      std::vector<double> r(cfg.k);
      net_forward(params, q, r, ws);
      alloc[c].push_back(std::move(r));
    }
  }
  return eval_min_common(cfg, set, alloc);
}

double eval_min_loss_fixed(const std::vector<double>& r, const TrainConfig& cfg,
                           const EvalSet& set) {
  if (static_cast<int>(r.size()) != cfg.k)
    throw std::invalid_argument("fixed allocation size != k");
  std::vector<std::vector<std::vector<double>>> alloc(set.pool.size());
  for (std::size_t c = 0; c < set.pool.size(); ++c)
    alloc[c].assign(set.pool[c].size(), r);
  return eval_min_common(cfg, set, alloc);
}

int select_checkpoint(const std::vector<double>& scores) {
  if (scores.empty()) throw std::invalid_argument("no checkpoints to select from");
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

TrainResult train(const TrainConfig& cfg) {
  validate_config(cfg);

  NetParams params = he_init(cfg.k, cfg.seed);
  AdamW opt;
  opt.init(params);
  Xoshiro256 rng(mix64(cfg.seed));
  const EvalSet eval = make_eval_set(cfg, mix64(cfg.seed ^ kEvalSalt));

  std::ofstream progress;
  if (!cfg.progress_csv.empty()) {
    progress.open(cfg.progress_csv);
    if (!progress) throw std::runtime_error("cannot open " + cfg.progress_csv);
    progress << std::setprecision(17) << "iter,e_min,checkpoint_score\n";
  }

  TrainResult result;
  NetParams best_params;
  double best_score = -kInf;

  for (int it = 1; it <= cfg.iters; ++it) {
    const StepInfo si = train_step(params, opt, cfg, rng);
    const bool snapshot = (it % cfg.checkpoint_every == 0) || it == cfg.iters;
    double score = 0.0;
    if (snapshot) {
      score = eval_min_loss(params, cfg, eval);
      result.checkpoint_scores.push_back(score);
      result.checkpoint_iters.push_back(it);
      if (score > best_score) {
        best_score = score;
        best_params = params;
        result.selected_index = static_cast<int>(result.checkpoint_scores.size()) - 1;
      }
    }
    if (progress.is_open()) {
      progress << it << ',' << si.e_min << ',';
      if (snapshot) progress << score;
      progress << '\n';
    }
  }

  result.selected.version = 1;
  result.selected.params = std::move(best_params);
  result.selected.family = cfg.family;
  result.selected.sigma = cfg.sigma;
  result.selected.h = cfg.h;
  result.selected.seed = cfg.seed;
  result.selected.has_optimizer = false;
  return result;
}

}  // namespace fbbai
