#pragma once

#include <cstdint>
#include <vector>

#include "fbbai/bandit.hpp"
#include "fbbai/divergence.hpp"

namespace fbbai {

// Allocation plan for the batch algorithm. allocation(a, stored) is the
// planned allocation of ruled batch a in [1, B-1] given the stored means
// Q'_1..Q'_a; recommend sees Q'_1..Q'_B. Both must be pure functions.
class BatchRule {
 public:
  virtual ~BatchRule() = default;
  virtual int batches() const = 0;  // B
  virtual std::vector<double> allocation(
      int a, const std::vector<std::vector<double>>& stored) const = 0;
  virtual int recommend(const std::vector<std::vector<double>>& stored) const = 0;
};

// Same allocation every ruled batch; recommends the best arm of the final
// stored mean vector.
class ConstantBatchRule final : public BatchRule {
 public:
  ConstantBatchRule(int b, std::vector<double> r);
  int batches() const override { return b_; }
  std::vector<double> allocation(int, const std::vector<std::vector<double>>&) const override;
  int recommend(const std::vector<std::vector<double>>& stored) const override;

 private:
  int b_;
  std::vector<double> r_;
};

struct DotTrace {
  int k = 0;
  int b = 0;                  // planned batches B
  std::int64_t t_batch = 0;   // pulls per batch T_B
  std::int64_t t_used = 0;    // (B+K-1) * T_B after truncation
  // One row per executed batch (B+K-1 of them). r holds planned
  // allocations, including the one-hot rows of the uniform phase. q holds
  // batch means, NaN where a batch drew nothing from an arm.
  std::vector<std::vector<double>> r;
  std::vector<std::vector<std::int64_t>> n;
  std::vector<std::vector<double>> q;
  std::vector<std::vector<double>> q_stored;  // Q'_1..Q'_B
  int recommendation = -1;
};

// Runs the delayed-tracking batch algorithm: K one-hot batches of T_B pulls
// seed Q'_1 with per-arm means; each ruled batch pulls n_{b,i} >=
// r_{b,i}(T_B - K) summing to T_B and folds its means into the stored
// vector by Q'_{a+1} = Q'_a + r ⊙ (Q_b - Q'_a). Leftover rounds beyond
// (B+K-1) * floor(T / (B+K-1)) are dropped.
DotTrace run_dot(const BatchRule& rule, const BanditInstance& instance,
                 std::int64_t t_budget, RewardStream& stream);

struct BoundCheck {
  bool ok = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

// Realized-divergence retention at cutoff b_c in [K, B+K-1]: the r-weighted
// batch divergence up to b_c dominates the stored-mean divergence
//   sum_{a <= b_c-K} r*_a . D(Q'_a || p) + sum_i D(Q'_{b_c-K+1, i} || p_i),
// where r*_a is the planned allocation of ruled batch a. Holds for every
// rule and every run; only convexity of KL in its first argument is used.
BoundCheck dot_retention_check(const DotTrace& trace, const BanditInstance& p,
                               int b_c, double tol = 1e-9);

// Per-run rate bound: against any instance p whose best-arm set excludes
// the realized recommendation, the mean realized divergence is at least
// (B/(B+K-1)) * (value - eps) / H(p), where value - eps certifies the
// rule's minimax objective. Throws if p does not make the run an error.
BoundCheck dot_rate_bound_check(const DotTrace& trace, const BanditInstance& p,
                                const Complexity& h, double rgob_minus_eps,
                                double tol = 1e-9);

}  // namespace fbbai
