#pragma once

#include <vector>

namespace fbbai {

// Exact solution of  max_{r in simplex_k} min_row (M r)_row  by enumerating
// basic solutions: for every support S of r and every |S|-subset of tight
// rows, solve the square system { rows equal v, sum r = 1 } and keep the
// best feasible candidate. Exact for the sizes used here (k <= 4).
struct MatrixGameResult {
  double value = 0.0;
  std::vector<double> r;
};

// m: rows x k payoff matrix. Entries of +infinity are capped internally at
// kGameInfCap, which leaves them non-binding whenever the true value is
// finite. Throws std::invalid_argument on empty input or k > 4, and
// std::length_error past the row guard.
inline constexpr double kGameInfCap = 1e9;
MatrixGameResult solve_maxmin(const std::vector<std::vector<double>>& m);

// Cutting-plane variant: alternates an exact solve on a working row set
// with a best-response row search until no row cuts the current value.
// Terminates in at most rows iterations; same value as solve_maxmin.
MatrixGameResult solve_maxmin_alternating(const std::vector<std::vector<double>>& m);

}  // namespace fbbai
