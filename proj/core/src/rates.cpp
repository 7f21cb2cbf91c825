#include "fbbai/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "fbbai/io.hpp"
#include "fbbai/matrix_game.hpp"

namespace fbbai {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (const auto& g : arms) n *= g.size();
  return n;
}

std::vector<double> GridSpec::point(std::size_t flat) const {
  std::vector<double> q(arms.size());
  for (int d = k() - 1; d >= 0; --d) {
    const std::size_t n = arms[d].size();
    q[d] = arms[d][flat % n];
    flat /= n;
  }
  return q;
}

std::size_t GridSpec::snap_index(const std::vector<double>& q) const {
  if (static_cast<int>(q.size()) != k())
    throw std::invalid_argument("grid snap: point size != k");
  std::size_t flat = 0;
  for (int d = 0; d < k(); ++d) {
    const auto& g = arms[d];
    const auto it = std::lower_bound(g.begin(), g.end(), q[d]);
    std::size_t idx;
    if (it == g.begin()) {
      idx = 0;
    } else if (it == g.end()) {
      idx = g.size() - 1;
    } else {
      // Equidistant points resolve to the lower index.
      const std::size_t hi = it - g.begin();
      idx = (q[d] - g[hi - 1] <= g[hi] - q[d]) ? hi - 1 : hi;
    }
    flat = flat * g.size() + idx;
  }
  return flat;
}

void GridSpec::validate() const {
  if (arms.size() < 2) throw std::invalid_argument("grid: needs k >= 2");
  for (const auto& g : arms) {
    if (g.empty()) throw std::invalid_argument("grid: empty arm axis");
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) throw std::invalid_argument("grid: non-finite value");
      if (i > 0 && !(g[i] > g[i - 1]))
        throw std::invalid_argument("grid: axis not strictly ascending");
    }
  }
}

GridSpec uniform_grid(int k, double lo, double hi, double step) {
  if (k < 2) throw std::invalid_argument("grid: needs k >= 2");
  if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("grid: bad range");
  std::vector<double> axis;
  const std::size_t n = static_cast<std::size_t>((hi - lo) / step + 1e-9) + 1;
  axis.reserve(n);
  for (std::size_t j = 0; j < n; ++j) axis.push_back(lo + static_cast<double>(j) * step);
  GridSpec grid;
  grid.arms.assign(k, axis);
  grid.validate();
  return grid;
}

namespace {

// Walks every grid point in flat order without materializing the lattice.
template <typename Fn>
void for_each_point(const GridSpec& grid, Fn&& fn) {
  const int k = grid.k();
  std::vector<std::size_t> idx(k, 0);
  std::vector<double> q(k);
  for (int d = 0; d < k; ++d) q[d] = grid.arms[d].front();
  std::size_t flat = 0;
  while (true) {
    fn(flat, idx, q);
    int d = k - 1;
    while (d >= 0) {
      if (++idx[d] < grid.arms[d].size()) {
        q[d] = grid.arms[d][idx[d]];
        break;
      }
      idx[d] = 0;
      q[d] = grid.arms[d].front();
      --d;
    }
    if (d < 0) return;
    ++flat;
  }
}

// Product H * d with the 0-divergence convention: a zero divergence
// contributes zero even against an infinite complexity.
double scaled_divergence(double h, double d) { return d == 0.0 ? 0.0 : h * d; }

}  // namespace

double oracle_exponent(const AllocationSource& source, const BanditInstance& p,
                       const GridSpec& q_grid) {
  q_grid.validate();
  validate_instance(p);
  if (source.k() != p.k() || q_grid.k() != p.k())
    throw std::invalid_argument("oracle exponent: k mismatch");
  const int k = p.k();

  std::vector<char> is_best(k, 0);
  for (int i : best_arm_set(p.means)) is_best[i] = 1;
  if (std::all_of(is_best.begin(), is_best.end(), [](char b) { return b == 1; }))
    throw std::domain_error("oracle exponent: every arm is best, no adversarial point");

  // Per-arm divergence lookup tables over the grid axes.
  std::vector<std::vector<double>> klt(k);
  for (int i = 0; i < k; ++i) {
    klt[i].reserve(q_grid.arms[i].size());
    for (double v : q_grid.arms[i]) klt[i].push_back(kl(p.family, v, p.means[i], p.sigma));
  }

  double best = kInf;
  std::vector<double> r(k);
  for_each_point(q_grid, [&](std::size_t, const std::vector<std::size_t>& idx,
                             const std::vector<double>& q) {
    // Adversarial iff some non-best arm of p attains max(q); ties count.
    const double top = *std::max_element(q.begin(), q.end());
    bool adversarial = false;
    for (int i = 0; i < k; ++i) {
      if (!is_best[i] && q[i] == top) {
        adversarial = true;
        break;
      }
    }
    if (!adversarial) return;
    source.allocation(std::span<const double>(q), std::span<double>(r));
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      if (r[i] == 0.0) continue;
      s += r[i] * klt[i][idx[i]];
    }
    best = std::min(best, s);
  });
  if (!(best < kInf) && best != best) best = kInf;  // keep NaN out
  if (best == kInf) throw std::domain_error("oracle exponent: no adversarial grid point");
  return best;
}

namespace {

// Best-arm sets, complexities, and per-arm divergence tables for every p
// grid point, shared by the inner objective and the solvers.
struct PGridCache {
  std::vector<std::vector<double>> means;
  std::vector<std::vector<int>> best;
  std::vector<double> h;
  // d[p][i][j] = D(q_grid.arms[i][j] || p_i).
  std::vector<std::vector<std::vector<double>>> d;
};

PGridCache build_p_cache(const GridSpec& p_grid, const GridSpec& q_grid,
                         const Complexity& h, Family family, double sigma) {
  PGridCache cache;
  const std::size_t np = p_grid.size();
  const int k = p_grid.k();
  cache.means.reserve(np);
  cache.best.reserve(np);
  cache.h.reserve(np);
  cache.d.reserve(np);
  for_each_point(p_grid, [&](std::size_t, const std::vector<std::size_t>&,
                             const std::vector<double>& p) {
    cache.means.push_back(p);
    cache.best.push_back(best_arm_set(p));
    cache.h.push_back(complexity(h, p));
    std::vector<std::vector<double>> dp(k);
    for (int i = 0; i < k; ++i) {
      dp[i].reserve(q_grid.arms[i].size());
      for (double v : q_grid.arms[i]) dp[i].push_back(kl(family, v, p[i], sigma));
    }
    cache.d.push_back(std::move(dp));
  });
  return cache;
}

bool contains_arm(const std::vector<int>& sorted, int arm) {
  return std::binary_search(sorted.begin(), sorted.end(), arm);
}

bool disjoint_sorted(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return false;
    if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return true;
}

}  // namespace

double rgo_inner(const AllocationSource& source, const GridSpec& q_grid,
                 const GridSpec& p_grid, const Complexity& h, Family family,
                 double sigma) {
  q_grid.validate();
  p_grid.validate();
  const int k = q_grid.k();
  if (p_grid.k() != k || source.k() != k)
    throw std::invalid_argument("inner objective: k mismatch");
  if (q_grid.size() * p_grid.size() > 20000000)
    throw std::length_error("inner objective: grids too large");

  const PGridCache cache = build_p_cache(p_grid, q_grid, h, family, sigma);
  double best = kInf;
  bool feasible = false;
  std::vector<double> r(k);
  for_each_point(q_grid, [&](std::size_t, const std::vector<std::size_t>& idx,
                             const std::vector<double>& q) {
    const std::vector<int> bq = best_arm_set(q);
    bool forwarded = false;
    for (std::size_t p = 0; p < cache.means.size(); ++p) {
      if (!disjoint_sorted(bq, cache.best[p])) continue;
      feasible = true;
      if (!forwarded) {
        source.allocation(std::span<const double>(q), std::span<double>(r));
        forwarded = true;
      }
      double s = 0.0;
      for (int i = 0; i < k; ++i) {
        if (r[i] == 0.0) continue;
        s += r[i] * cache.d[p][i][idx[i]];
      }
      best = std::min(best, scaled_divergence(cache.h[p], s));
    }
  });
  if (!feasible) throw std::domain_error("inner objective: no adversarial (q, p) pair");
  return best;
}

namespace {

// Payoff rows of the per-q game for a fixed recommendation J: one row per p
// point adversarial to J, entries H(p) D(q_i || p_i) with the zero-divergence
// convention. Empty result means J cannot err on this p grid.
std::vector<std::vector<double>> game_rows(const PGridCache& cache,
                                           const std::vector<std::size_t>& q_idx,
                                           int j, int k) {
  std::vector<std::vector<double>> rows;
  for (std::size_t p = 0; p < cache.means.size(); ++p) {
    if (contains_arm(cache.best[p], j)) continue;
    std::vector<double> row(k);
    for (int i = 0; i < k; ++i)
      row[i] = scaled_divergence(cache.h[p], cache.d[p][i][q_idx[i]]);
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixGameResult solve_game(const std::vector<std::vector<double>>& rows,
                            SolveMethod method) {
  return method == SolveMethod::kExhaustive ? solve_maxmin(rows)
                                            : solve_maxmin_alternating(rows);
}

// Recommendation candidates in deterministic preference order: the honest
// (empirical-best) arm first, then the rest ascending.
std::vector<int> j_order(int honest, int k) {
  std::vector<int> order{honest};
  for (int j = 0; j < k; ++j)
    if (j != honest) order.push_back(j);
  return order;
}

}  // namespace

DiscreteSolution rgo_solve_discrete(const GridSpec& q_grid, const GridSpec& p_grid,
                                    const Complexity& h, Family family, double sigma,
                                    SolveMethod method) {
  q_grid.validate();
  p_grid.validate();
  const int k = q_grid.k();
  if (p_grid.k() != k) throw std::invalid_argument("minimax solve: k mismatch");
  if (q_grid.size() * p_grid.size() > 1000000)
    throw std::length_error("minimax solve: grids too large for table solve");

  const PGridCache cache = build_p_cache(p_grid, q_grid, h, family, sigma);

  DiscreteSolution sol;
  sol.k = k;
  sol.batches = 1;
  sol.family = family;
  sol.sigma = sigma;
  sol.h = h;
  sol.q_grid = q_grid;
  sol.p_grid = p_grid;
  sol.r1.resize(q_grid.size());
  sol.j1.assign(q_grid.size(), 0);
  sol.value = kInf;

  bool feasible = false;
  for_each_point(q_grid, [&](std::size_t flat, const std::vector<std::size_t>& idx,
                             const std::vector<double>& q) {
    const int honest = best_arm(q);
    // A point where the honest recommendation cannot err on the p grid is
    // unconstrained; it keeps a default row and stays out of the minimum.
    if (game_rows(cache, idx, honest, k).empty()) {
      sol.r1[flat].assign(k, 1.0 / k);
      sol.j1[flat] = honest;
      return;
    }
    feasible = true;
    double best_value = -kInf;
    for (int j : j_order(honest, k)) {
      const auto rows = game_rows(cache, idx, j, k);
      if (rows.empty()) continue;
      const MatrixGameResult res = solve_game(rows, method);
      if (res.value > best_value) {
        best_value = res.value;
        sol.r1[flat] = res.r;
        sol.j1[flat] = j;
      }
    }
    sol.value = std::min(sol.value, best_value);
  });
  if (!feasible)
    throw std::domain_error("minimax solve: no adversarial (q, p) pair on the grids");
  // The tables are the product; the certified value is their exact worst case.
  sol.value = evaluate_solution(sol);
  return sol;
}

namespace {

// All allocations with coordinates that are multiples of 1/mesh.
std::vector<std::vector<double>> simplex_mesh(int k, int mesh) {
  std::vector<std::vector<double>> points;
  std::vector<int> parts(k, 0);
  const auto rec = [&](auto&& self, int arm, int left) -> void {
    if (arm == k - 1) {
      parts[arm] = left;
      std::vector<double> r(k);
      for (int i = 0; i < k; ++i) r[i] = static_cast<double>(parts[i]) / mesh;
      points.push_back(std::move(r));
      return;
    }
    for (int c = 0; c <= left; ++c) {
      parts[arm] = c;
      self(self, arm + 1, left - c);
    }
  };
  rec(rec, 0, mesh);
  return points;
}

// Stage-2 game at history (q1, q2) under first-batch allocation r1: rows are
// adversarial p with the first-batch divergence folded into every column
// (valid because r2 sums to one).
struct StageTwoBest {
  double value = -kInf;
  std::vector<double> r2;
  int j2 = 0;
};

struct RgobWorkspace {
  const PGridCache* cache = nullptr;
  const GridSpec* q_grid = nullptr;
  int k = 0;
  SolveMethod method = SolveMethod::kExhaustive;
  // c[p] = sum_i r1_i D(q1_i || p_i) for the current (q1, r1).
  std::vector<double> c;

  void fold_stage_one(const std::vector<std::size_t>& q1_idx,
                      const std::vector<double>& r1) {
    c.assign(cache->means.size(), 0.0);
    for (std::size_t p = 0; p < cache->means.size(); ++p) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) {
        if (r1[i] == 0.0) continue;
        s += r1[i] * cache->d[p][i][q1_idx[i]];
      }
      c[p] = s;
    }
  }

  std::vector<std::vector<double>> rows_for(const std::vector<std::size_t>& q2_idx,
                                            int j) const {
    std::vector<std::vector<double>> rows;
    for (std::size_t p = 0; p < cache->means.size(); ++p) {
      if (contains_arm(cache->best[p], j)) continue;
      std::vector<double> row(k);
      for (int i = 0; i < k; ++i)
        row[i] =
            scaled_divergence(cache->h[p] * 0.5, cache->d[p][i][q2_idx[i]] + c[p]);
      rows.push_back(std::move(row));
    }
    return rows;
  }

  // Honest recommendation for a two-batch history: best arm of the pooled
  // (equal-weight) means; its vacuity decides whether the history counts.
  static int honest_j(const std::vector<double>& q1, const std::vector<double>& q2) {
    std::vector<double> pooled(q1.size());
    for (std::size_t i = 0; i < q1.size(); ++i) pooled[i] = 0.5 * (q1[i] + q2[i]);
    return best_arm(pooled);
  }

  StageTwoBest solve_history(const std::vector<std::size_t>& q2_idx,
                             const std::vector<double>& q1,
                             const std::vector<double>& q2, bool* vacuous) const {
    StageTwoBest best;
    const int honest = honest_j(q1, q2);
    if (rows_for(q2_idx, honest).empty()) {
      *vacuous = true;
      best.r2.assign(k, 1.0 / k);
      best.j2 = honest;
      return best;
    }
    *vacuous = false;
    for (int j : j_order(honest, k)) {
      const auto rows = rows_for(q2_idx, j);
      if (rows.empty()) continue;
      const MatrixGameResult res = solve_game(rows, method);
      if (res.value > best.value) {
        best.value = res.value;
        best.r2 = res.r;
        best.j2 = j;
      }
    }
    return best;
  }

  // Worst case over second-batch points of the best stage-2 response; the
  // objective the stage-1 search maximizes.
  double stage_one_value(const std::vector<std::size_t>& q1_idx,
                         const std::vector<double>& q1,
                         const std::vector<double>& r1) {
    fold_stage_one(q1_idx, r1);
    double worst = kInf;
    for_each_point(*q_grid, [&](std::size_t, const std::vector<std::size_t>& q2_idx,
                                const std::vector<double>& q2) {
      bool vacuous = false;
      const StageTwoBest s = solve_history(q2_idx, q1, q2, &vacuous);
      if (!vacuous) worst = std::min(worst, s.value);
    });
    return worst;  // +inf when every continuation is vacuous
  }
};

}  // namespace

DiscreteSolution rgob_solve_discrete(int batches, const GridSpec& q_grid,
                                     const GridSpec& p_grid, const Complexity& h,
                                     Family family, double sigma, SolveMethod method,
                                     int r_mesh) {
  if (batches == 1) return rgo_solve_discrete(q_grid, p_grid, h, family, sigma, method);
  if (batches != 2)
    throw std::invalid_argument("batch minimax solve: only B in {1, 2} is supported");
  if (r_mesh < 2) throw std::invalid_argument("batch minimax solve: mesh too coarse");
  q_grid.validate();
  p_grid.validate();
  const int k = q_grid.k();
  if (p_grid.k() != k) throw std::invalid_argument("batch minimax solve: k mismatch");

  const std::size_t nq = q_grid.size();
  const std::vector<std::vector<double>> mesh = simplex_mesh(k, r_mesh);
  if (nq * nq * p_grid.size() * mesh.size() > 50000000)
    throw std::length_error("batch minimax solve: grid/mesh product too large");

  const PGridCache cache = build_p_cache(p_grid, q_grid, h, family, sigma);
  RgobWorkspace ws;
  ws.cache = &cache;
  ws.q_grid = &q_grid;
  ws.k = k;
  ws.method = method;

  DiscreteSolution sol;
  sol.k = k;
  sol.batches = 2;
  sol.family = family;
  sol.sigma = sigma;
  sol.h = h;
  sol.q_grid = q_grid;
  sol.p_grid = p_grid;
  sol.r1.resize(nq);
  sol.j1.assign(nq, 0);
  sol.r2.assign(nq * nq, {});
  sol.j2.assign(nq * nq, 0);
  sol.value = kInf;

  bool feasible = false;
  for_each_point(q_grid, [&](std::size_t flat1, const std::vector<std::size_t>& idx1,
                             const std::vector<double>& q1) {
    sol.j1[flat1] = best_arm(q1);
    // First-batch allocation: coarse simplex mesh, then a golden-section
    // polish along the K = 2 edge. The final tables are re-evaluated
    // exactly, so the search only affects tightness, never soundness.
    double best_value = -kInf;
    std::vector<double> best_r1;
    for (const auto& r1 : mesh) {
      const double v = ws.stage_one_value(idx1, q1, r1);
      if (v > best_value) {
        best_value = v;
        best_r1 = r1;
      }
    }
    if (k == 2 && best_value > -kInf && best_value < kInf) {
      const double center = best_r1[0];
      double lo = std::max(0.0, center - 1.0 / r_mesh);
      double hi = std::min(1.0, center + 1.0 / r_mesh);
      const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
      double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
      const auto eval = [&](double x) {
        return ws.stage_one_value(idx1, q1, {x, 1.0 - x});
      };
      double fa = eval(a), fb = eval(b);
      for (int it = 0; it < 60; ++it) {
        if (fa < fb) {
          lo = a;
          a = b;
          fa = fb;
          b = lo + gr * (hi - lo);
          fb = eval(b);
        } else {
          hi = b;
          b = a;
          fb = fa;
          a = hi - gr * (hi - lo);
          fa = eval(a);
        }
      }
      const double x = fa > fb ? a : b;
      const double v = std::max(fa, fb);
      if (v > best_value) {
        best_value = v;
        best_r1 = {x, 1.0 - x};
      }
    }
    if (best_r1.empty()) best_r1.assign(k, 1.0 / k);
    sol.r1[flat1] = best_r1;

    // Freeze the stage-2 tables under the chosen first-batch allocation.
    ws.fold_stage_one(idx1, best_r1);
    for_each_point(q_grid, [&](std::size_t flat2, const std::vector<std::size_t>& idx2,
                               const std::vector<double>& q2) {
      bool vacuous = false;
      const StageTwoBest s = ws.solve_history(idx2, q1, q2, &vacuous);
      sol.r2[flat1 * nq + flat2] = s.r2;
      sol.j2[flat1 * nq + flat2] = s.j2;
      if (!vacuous) feasible = true;
    });
  });
  if (!feasible)
    throw std::domain_error("batch minimax solve: no adversarial pair on the grids");
  sol.value = evaluate_solution(sol);
  return sol;
}

double evaluate_solution(const DiscreteSolution& sol) {
  const int k = sol.k;
  const PGridCache cache =
      build_p_cache(sol.p_grid, sol.q_grid, sol.h, sol.family, sol.sigma);
  double worst = kInf;
  bool feasible = false;

  if (sol.batches == 1) {
    for_each_point(sol.q_grid, [&](std::size_t flat, const std::vector<std::size_t>& idx,
                                   const std::vector<double>& q) {
      if (game_rows(cache, idx, best_arm(q), k).empty()) return;  // vacuous point
      feasible = true;
      const std::vector<double>& r = sol.r1[flat];
      for (std::size_t p = 0; p < cache.means.size(); ++p) {
        if (contains_arm(cache.best[p], sol.j1[flat])) continue;
        double s = 0.0;
        for (int i = 0; i < k; ++i) {
          if (r[i] == 0.0) continue;
          s += r[i] * cache.d[p][i][idx[i]];
        }
        worst = std::min(worst, scaled_divergence(cache.h[p], s));
      }
    });
  } else {
    const std::size_t nq = sol.q_grid.size();
    for_each_point(sol.q_grid, [&](std::size_t f1, const std::vector<std::size_t>& i1,
                                   const std::vector<double>& q1) {
      const std::vector<double>& r1 = sol.r1[f1];
      for_each_point(sol.q_grid, [&](std::size_t f2, const std::vector<std::size_t>& i2,
                                     const std::vector<double>& q2) {
        const int honest = RgobWorkspace::honest_j(q1, q2);
        bool honest_feasible = false;
        for (std::size_t p = 0; p < cache.means.size(); ++p)
          if (!contains_arm(cache.best[p], honest)) {
            honest_feasible = true;
            break;
          }
        if (!honest_feasible) return;  // vacuous history
        feasible = true;
        const std::vector<double>& r2 = sol.r2[f1 * nq + f2];
        const int j = sol.j2[f1 * nq + f2];
        for (std::size_t p = 0; p < cache.means.size(); ++p) {
          if (contains_arm(cache.best[p], j)) continue;
          double s = 0.0;
          for (int i = 0; i < k; ++i) {
            if (r1[i] != 0.0) s += r1[i] * cache.d[p][i][i1[i]];
            if (r2[i] != 0.0) s += r2[i] * cache.d[p][i][i2[i]];
          }
          worst = std::min(worst, scaled_divergence(cache.h[p] * 0.5, s));
        }
      });
    });
  }
  if (!feasible)
    throw std::domain_error("solution evaluation: no adversarial pair on the grids");
  return worst;
}

std::shared_ptr<const AllocationSource> solution_source(const DiscreteSolution& sol) {
  return std::make_shared<TableSource>(sol.q_grid.arms, sol.r1);
}

namespace {

class SolutionBatchRule final : public BatchRule {
 public:
  explicit SolutionBatchRule(DiscreteSolution sol) : sol_(std::move(sol)) {}
  int batches() const override { return sol_.batches; }

  std::vector<double> allocation(
      int a, const std::vector<std::vector<double>>& stored) const override {
    if (a != 1 || sol_.batches != 2)
      throw std::invalid_argument("solution rule: stage out of range");
    return sol_.r1[sol_.q_grid.snap_index(stored[0])];
  }

  int recommend(const std::vector<std::vector<double>>& stored) const override {
    if (sol_.batches == 1) return sol_.j1[sol_.q_grid.snap_index(stored[0])];
    const std::size_t nq = sol_.q_grid.size();
    const std::size_t f1 = sol_.q_grid.snap_index(stored[0]);
    const std::size_t f2 = sol_.q_grid.snap_index(stored[1]);
    return sol_.j2[f1 * nq + f2];
  }

 private:
  DiscreteSolution sol_;
};

}  // namespace

std::unique_ptr<BatchRule> solution_batch_rule(const DiscreteSolution& sol) {
  return std::make_unique<SolutionBatchRule>(sol);
}

void save_solution(const DiscreteSolution& sol, const std::string& path) {
  nlohmann::ordered_json j;
  j["k"] = sol.k;
  j["batches"] = sol.batches;
  j["family"] = family_name(sol.family);
  j["sigma"] = sol.sigma;
  j["complexity"] = complexity_name(sol.h);
  j["value"] = sol.value;
  j["q_grid"] = sol.q_grid.arms;
  j["p_grid"] = sol.p_grid.arms;
  j["r1"] = sol.r1;
  j["j1"] = sol.j1;
  if (sol.batches == 2) {
    j["r2"] = sol.r2;
    j["j2"] = sol.j2;
  }
  // Aliases read by the table policy loader.
  j["grids"] = sol.q_grid.arms;
  j["table"] = sol.r1;
  write_file(path, j.dump(2) + "\n");
}

DiscreteSolution load_solution(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("solution " + path + ": " + e.what());
  }
  DiscreteSolution sol;
  sol.k = j.at("k").get<int>();
  sol.batches = j.at("batches").get<int>();
  sol.family = family_from_name(j.at("family").get<std::string>());
  sol.sigma = j.value("sigma", 1.0);
  sol.h = complexity_from_name(j.at("complexity").get<std::string>());
  sol.value = j.at("value").get<double>();
  sol.q_grid.arms = j.at("q_grid").get<std::vector<std::vector<double>>>();
  sol.p_grid.arms = j.at("p_grid").get<std::vector<std::vector<double>>>();
  sol.q_grid.validate();
  sol.p_grid.validate();
  sol.r1 = j.at("r1").get<std::vector<std::vector<double>>>();
  sol.j1 = j.at("j1").get<std::vector<int>>();
  const std::size_t nq = sol.q_grid.size();
  if (sol.r1.size() != nq || sol.j1.size() != nq)
    throw std::runtime_error("solution " + path + ": table size mismatch");
  if (sol.batches == 2) {
    sol.r2 = j.at("r2").get<std::vector<std::vector<double>>>();
    sol.j2 = j.at("j2").get<std::vector<int>>();
    if (sol.r2.size() != nq * nq || sol.j2.size() != nq * nq)
      throw std::runtime_error("solution " + path + ": stage-2 table size mismatch");
  } else if (sol.batches != 1) {
    throw std::runtime_error("solution " + path + ": unsupported batch count");
  }
  return sol;
}

}  // namespace fbbai
