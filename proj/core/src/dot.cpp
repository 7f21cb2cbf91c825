#include "fbbai/dot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fbbai {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> checked_simplex(std::vector<double> r, int k, const char* what) {
  if (static_cast<int>(r.size()) != k)
    throw std::logic_error(std::string(what) + ": allocation size != k");
  double sum = 0.0;
  for (double v : r) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::logic_error(std::string(what) + ": allocation off the simplex");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::logic_error(std::string(what) + ": allocation off the simplex");
  return r;
}

// n_i = ceil(r_i * m), then the shortfall to t_batch goes one pull at a time
// to arms in decreasing fractional-part order (index breaks ties).
std::vector<std::int64_t> round_batch_counts(const std::vector<double>& r,
                                             std::int64_t t_batch, int k) {
  const double m = static_cast<double>(t_batch - k);
  std::vector<std::int64_t> n(k);
  std::vector<double> frac(k);
  std::int64_t used = 0;
  for (int i = 0; i < k; ++i) {
    const double target = r[i] * m;
    n[i] = static_cast<std::int64_t>(std::ceil(target));
    frac[i] = target - std::floor(target);
    used += n[i];
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&frac](int a, int b) { return frac[a] > frac[b]; });
  std::int64_t extra = t_batch - used;
  for (int j = 0; extra > 0; j = (j + 1) % k, --extra) n[order[j]] += 1;
  return n;
}

// Realized r-weighted divergence of batches 1..b_c (1-based), skipping
// zero-allocation arms whose batch mean is undefined.
double realized_divergence(const DotTrace& trace, const BanditInstance& p, int b_c) {
  double total = 0.0;
  for (int b = 0; b < b_c; ++b) {
    for (int i = 0; i < trace.k; ++i) {
      const double w = trace.r[b][i];
      if (w == 0.0) continue;
      total += w * kl(p.family, trace.q[b][i], p.means[i], p.sigma);
    }
  }
  return total;
}

}  // namespace

ConstantBatchRule::ConstantBatchRule(int b, std::vector<double> r) : b_(b) {
  if (b < 1) throw std::invalid_argument("batch rule: needs B >= 1");
  r_ = checked_simplex(std::move(r), static_cast<int>(r.size()), "constant rule");
  if (r_.size() < 2) throw std::invalid_argument("batch rule: needs k >= 2");
}

std::vector<double> ConstantBatchRule::allocation(
    int, const std::vector<std::vector<double>>&) const {
  return r_;
}

int ConstantBatchRule::recommend(const std::vector<std::vector<double>>& stored) const {
  return best_arm(stored.back());
}

DotTrace run_dot(const BatchRule& rule, const BanditInstance& instance,
                 std::int64_t t_budget, RewardStream& stream) {
  const int k = instance.k();
  const int b_planned = rule.batches();
  if (b_planned < 1) throw std::invalid_argument("batch run: needs B >= 1");
  const int rounds = b_planned + k - 1;
  const std::int64_t t_batch = t_budget / rounds;
  if (t_batch < 1) throw std::invalid_argument("batch run: budget below one pull per batch");
  if (b_planned >= 2 && t_batch < k)
    throw std::invalid_argument("batch run: batch size below K");

  DotTrace trace;
  trace.k = k;
  trace.b = b_planned;
  trace.t_batch = t_batch;
  trace.t_used = static_cast<std::int64_t>(rounds) * t_batch;
  trace.r.reserve(rounds);
  trace.n.reserve(rounds);
  trace.q.reserve(rounds);

  const auto pull_batch = [&](const std::vector<std::int64_t>& n) {
    std::vector<double> means(k, kNaN);
    for (int i = 0; i < k; ++i) {
      if (n[i] == 0) continue;
      double sum = 0.0;
      for (std::int64_t c = 0; c < n[i]; ++c) sum += stream.draw(instance, i);
      means[i] = sum / static_cast<double>(n[i]);
    }
    return means;
  };

  // Uniform phase: batch b devotes itself to arm b and seeds the stored
  // vector with that arm's mean.
  std::vector<double> stored0(k);
  for (int b = 0; b < k; ++b) {
    std::vector<double> one_hot(k, 0.0);
    one_hot[b] = 1.0;
    std::vector<std::int64_t> n(k, 0);
    n[b] = t_batch;
    const std::vector<double> q = pull_batch(n);
    stored0[b] = q[b];
    trace.r.push_back(std::move(one_hot));
    trace.n.push_back(std::move(n));
    trace.q.push_back(q);
  }
  trace.q_stored.push_back(stored0);

  for (int a = 1; a <= b_planned - 1; ++a) {
    std::vector<double> r =
        checked_simplex(rule.allocation(a, trace.q_stored), k, "batch rule");
    const std::vector<std::int64_t> n = round_batch_counts(r, t_batch, k);
    const std::vector<double> q = pull_batch(n);
    // Stored update: new = old + r (.) (batch - old); untouched arms keep
    // their stored mean (the batch mean there is undefined).
    std::vector<double> next = trace.q_stored.back();
    for (int i = 0; i < k; ++i)
      if (r[i] != 0.0) next[i] += r[i] * (q[i] - next[i]);
    trace.q_stored.push_back(std::move(next));
    trace.r.push_back(std::move(r));
    trace.n.push_back(n);
    trace.q.push_back(q);
  }

  trace.recommendation = rule.recommend(trace.q_stored);
  if (trace.recommendation < 0 || trace.recommendation >= k)
    throw std::logic_error("batch rule: recommendation out of range");
  return trace;
}

BoundCheck dot_retention_check(const DotTrace& trace, const BanditInstance& p,
                               int b_c, double tol) {
  const int k = trace.k;
  const int rounds = static_cast<int>(trace.r.size());
  if (p.k() != k) throw std::invalid_argument("retention check: instance k mismatch");
  if (b_c < k || b_c > rounds)
    throw std::invalid_argument("retention check: cutoff outside [K, B+K-1]");

  BoundCheck res;
  res.lhs = realized_divergence(trace, p, b_c);

  // Completed stages a use the planned allocation of ruled batch a (trace
  // row K-1+a); the current stored vector enters with full weight.
  const int stages = b_c - k;
  res.rhs = 0.0;
  for (int a = 1; a <= stages; ++a) {
    const std::vector<double>& w = trace.r[k - 1 + a];
    const std::vector<double>& stored = trace.q_stored[a - 1];
    for (int i = 0; i < k; ++i) {
      if (w[i] == 0.0) continue;
      res.rhs += w[i] * kl(p.family, stored[i], p.means[i], p.sigma);
    }
  }
  const std::vector<double>& current = trace.q_stored[stages];
  for (int i = 0; i < k; ++i)
    res.rhs += kl(p.family, current[i], p.means[i], p.sigma);

  res.ok = res.lhs + tol >= res.rhs;
  return res;
}

BoundCheck dot_rate_bound_check(const DotTrace& trace, const BanditInstance& p,
                                const Complexity& h, double rgob_minus_eps,
                                double tol) {
  if (p.k() != trace.k)
    throw std::invalid_argument("rate bound check: instance k mismatch");
  if (!is_error(p.means, trace.recommendation))
    throw std::invalid_argument(
        "rate bound check: instance does not make this run an error");

  const int rounds = static_cast<int>(trace.r.size());
  BoundCheck res;
  res.lhs = realized_divergence(trace, p, rounds) / rounds;
  const double hv = complexity(h, p.means);
  res.rhs = std::isfinite(hv)
                ? (static_cast<double>(trace.b) / rounds) * rgob_minus_eps / hv
                : 0.0;
  res.ok = res.lhs + tol >= res.rhs;
  return res;
}

}  // namespace fbbai
