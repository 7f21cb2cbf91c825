#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fbbai/bandit.hpp"
#include "fbbai/divergence.hpp"
#include "fbbai/dot.hpp"
#include "fbbai/policy.hpp"

namespace fbbai {

// Product grid over mean vectors: one sorted value list per arm.
struct GridSpec {
  std::vector<std::vector<double>> arms;

  int k() const { return static_cast<int>(arms.size()); }
  std::size_t size() const;                       // product of arm grid sizes
  std::vector<double> point(std::size_t flat) const;  // arm 0 most significant
  std::size_t snap_index(const std::vector<double>& q) const;  // nearest, ties low
  void validate() const;
};

// Same value list for every arm, covering [lo, hi] with the given step.
GridSpec uniform_grid(int k, double lo, double hi, double step);

// Exponent of the oracle allocation on instance p: the minimum over
// adversarial grid points q of sum_i r_i(q) D(q_i || p_i). A grid point is
// adversarial when some non-best arm of p attains max(q); exact ties count,
// which keeps the grid minimum converging quadratically in the step.
double oracle_exponent(const AllocationSource& source, const BanditInstance& p,
                       const GridSpec& q_grid);

// Discretized minimax tables. batches == 1 uses r1/j1 indexed by the q-grid
// flat index; batches == 2 adds r2/j2 indexed by q1-major (q1, q2) pairs.
struct DiscreteSolution {
  int k = 0;
  int batches = 1;
  Family family = Family::kBernoulli;
  double sigma = 1.0;
  Complexity h;
  GridSpec q_grid, p_grid;
  double value = 0.0;  // certified: the tables' exact worst case on the grids

  std::vector<std::vector<double>> r1;
  std::vector<int> j1;
  std::vector<std::vector<double>> r2;
  std::vector<int> j2;
};

enum class SolveMethod { kExhaustive, kAlternating };

// Worst-case exponent of a given allocation source on the grids:
//   min over (q, p) pairs with best_set(q) and best_set(p) disjoint of
//   H(p) sum_i r_i(q) D(q_i || p_i).
// The disjointness convention matches the trainer's adversarial constraint.
double rgo_inner(const AllocationSource& source, const GridSpec& q_grid,
                 const GridSpec& p_grid, const Complexity& h, Family family,
                 double sigma = 1.0);

// Single-batch minimax solve. Decomposes per q-point: for each grid q,
// maximize over (r, J) the minimum over grid p adversarial to J of
// H(p) sum_i r_i D(q_i || p_i); the certified value is the minimum over q.
// Throws std::domain_error when no q point admits an adversarial p.
DiscreteSolution rgo_solve_discrete(const GridSpec& q_grid, const GridSpec& p_grid,
                                    const Complexity& h, Family family, double sigma,
                                    SolveMethod method);

// Batch version for B in {1, 2}; B == 1 dispatches to rgo_solve_discrete.
// B == 2 runs backward induction with the first-batch allocation searched
// over a simplex mesh (refined for K = 2). The reported value is an exact
// re-evaluation of the output tables, hence achievable.
DiscreteSolution rgob_solve_discrete(int batches, const GridSpec& q_grid,
                                     const GridSpec& p_grid, const Complexity& h,
                                     Family family, double sigma, SolveMethod method,
                                     int r_mesh = 64);

// Exact worst case of a solution's tables over its grids; equals .value.
double evaluate_solution(const DiscreteSolution& sol);

// The B=1 allocation table as a policy source (multilinear interpolation).
std::shared_ptr<const AllocationSource> solution_source(const DiscreteSolution& sol);

// The solution's tables as a batch rule. Off-grid stored means are snapped
// to the nearest grid point before lookup.
std::unique_ptr<BatchRule> solution_batch_rule(const DiscreteSolution& sol);

void save_solution(const DiscreteSolution& sol, const std::string& path);
DiscreteSolution load_solution(const std::string& path);

// Fixed-confidence optimal allocation, Bernoulli instances with a unique
// best arm: maximizes over r the smallest challenger transportation cost
//   g_a(r) = (r_star + r_a) * I_{r_star/(r_star+r_a)}(mu_star, mu_a),
// equalizing g_a across challengers at the optimum.
struct FcResult {
  std::vector<double> r;
  double value = 0.0;
};
FcResult fc_allocation(const BanditInstance& p, double tol = 1e-11);

// Mixture divergence I_alpha(x, y) = alpha D(x||z) + (1-alpha) D(y||z) at
// the minimizing z, found by bisection on the convex objective.
double mixture_divergence_bernoulli(double alpha, double x, double y);

// Error lower bound for a fixed-budget run of the fixed-confidence
// allocation on the paired instances (p1, p2) that differ only in arm 0:
//   (1/2) exp(-2 T r_0(p2) D(p2_0 || p1_0) (1 + slack)).
double fc_fb_suboptimality_bound(const BanditInstance& p1, const BanditInstance& p2,
                                 std::int64_t t, double slack = 0.0);
double fc_fb_suboptimality_bound_at(double r0, double d, std::int64_t t,
                                    double slack = 0.0);

}  // namespace fbbai
