#include "fbbai/matrix_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fbbai {

namespace {

std::vector<std::vector<double>> capped(const std::vector<std::vector<double>>& m) {
  if (m.empty() || m.front().empty())
    throw std::invalid_argument("matrix game: empty payoff matrix");
  const std::size_t k = m.front().size();
  if (k > 4) throw std::invalid_argument("matrix game: exhaustive solver is for k <= 4");
  std::vector<std::vector<double>> out(m.size());
  for (std::size_t p = 0; p < m.size(); ++p) {
    if (m[p].size() != k)
      throw std::invalid_argument("matrix game: ragged payoff matrix");
    out[p].resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      const double v = m[p][i];
      if (std::isnan(v) || v == -std::numeric_limits<double>::infinity())
        throw std::invalid_argument("matrix game: entries must be > -inf and not NaN");
      out[p][i] = std::min(v, kGameInfCap);
    }
  }
  return out;
}

double value_of(const std::vector<std::vector<double>>& m, const std::vector<double>& r) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& row : m) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += row[i] * r[i];
    worst = std::min(worst, s);
  }
  return worst;
}

// In-place Gaussian elimination with partial pivoting; false on a
// (near-)singular system.
bool solve_linear(std::vector<std::vector<double>>& a, std::vector<double>& b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < n; ++row)
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    if (std::abs(a[pivot][col]) < 1e-12) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t row = col + 1; row < n; ++row) {
      const double f = a[row][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[row][c] -= f * a[col][c];
      b[row] -= f * b[col];
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    double s = b[col];
    for (std::size_t c = col + 1; c < n; ++c) s -= a[col][c] * b[c];
    b[col] = s / a[col][col];
  }
  return true;
}

std::size_t choose(std::size_t n, std::size_t s) {
  std::size_t c = 1;
  for (std::size_t j = 1; j <= s; ++j) {
    if (c > std::size_t{1} << 60) return c;
    c = c * (n - j + 1) / j;
  }
  return c;
}

// Visits every s-subset of [0, n) in lexicographic order.
template <typename Fn>
void for_each_subset(std::size_t n, std::size_t s, Fn&& fn) {
  std::vector<std::size_t> idx(s);
  for (std::size_t j = 0; j < s; ++j) idx[j] = j;
  if (s > n) return;
  while (true) {
    fn(idx);
    std::size_t j = s;
    while (j-- > 0) {
      if (idx[j] + (s - j) <= n - 1 + 0) {
        ++idx[j];
        for (std::size_t l = j + 1; l < s; ++l) idx[l] = idx[l - 1] + 1;
        break;
      }
      if (j == 0) return;
    }
  }
}

}  // namespace

MatrixGameResult solve_maxmin(const std::vector<std::vector<double>>& m_in) {
  const auto m = capped(m_in);
  const std::size_t rows = m.size();
  const std::size_t k = m.front().size();

  std::size_t candidates = 0;
  for (std::size_t s = 1; s <= k; ++s) candidates += choose(rows, s);
  if (candidates > 20000000)
    throw std::length_error("matrix game: too many basic solutions to enumerate");

  MatrixGameResult best;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<double> r(k);

  // Basic solutions: a support S of r plus |S| tight rows determine a square
  // system { (M r)_p = v on the rows, sum_S r = 1 }. Every vertex of the LP
  // arises this way, so evaluating each candidate against the full matrix
  // finds the exact optimum.
  for (std::size_t s = 1; s <= k; ++s) {
    for_each_subset(k, s, [&](const std::vector<std::size_t>& support) {
      for_each_subset(rows, s, [&](const std::vector<std::size_t>& tight) {
        std::vector<std::vector<double>> a(s + 1, std::vector<double>(s + 1, 0.0));
        std::vector<double> b(s + 1, 0.0);
        for (std::size_t p = 0; p < s; ++p) {
          for (std::size_t i = 0; i < s; ++i) a[p][i] = m[tight[p]][support[i]];
          a[p][s] = -1.0;  // minus the game value v
        }
        for (std::size_t i = 0; i < s; ++i) a[s][i] = 1.0;
        b[s] = 1.0;
        if (!solve_linear(a, b)) return;

        std::fill(r.begin(), r.end(), 0.0);
        double sum = 0.0;
        for (std::size_t i = 0; i < s; ++i) {
          if (b[i] < -1e-9) return;  // infeasible vertex
          r[support[i]] = std::max(b[i], 0.0);
          sum += r[support[i]];
        }
        if (sum <= 0.0) return;
        for (double& v : r) v /= sum;

        const double value = value_of(m, r);
        if (value > best.value) {
          best.value = value;
          best.r = r;
        }
      });
    });
  }
  if (best.r.empty()) throw std::runtime_error("matrix game: no feasible vertex found");
  return best;
}

MatrixGameResult solve_maxmin_alternating(const std::vector<std::vector<double>>& m_in) {
  const auto m = capped(m_in);
  const std::size_t rows = m.size();
  const std::size_t k = m.front().size();

  std::vector<double> r(k, 1.0 / static_cast<double>(k));
  std::vector<std::size_t> working;
  MatrixGameResult best;

  for (std::size_t iter = 0; iter <= rows; ++iter) {
    // Best response to the current allocation.
    std::size_t cut = 0;
    double cut_value = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < rows; ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += m[p][i] * r[i];
      if (s < cut_value) {
        cut_value = s;
        cut = p;
      }
    }
    const bool known = std::find(working.begin(), working.end(), cut) != working.end();
    if (!working.empty()) {
      // The working-set value upper-bounds the game; the best response
      // certifies r whenever it no longer cuts below it.
      if (known || cut_value >= best.value - 1e-12) {
        best.value = cut_value;
        best.r = r;
        return best;
      }
    }
    working.push_back(cut);
    std::vector<std::vector<double>> sub;
    sub.reserve(working.size());
    for (std::size_t p : working) sub.push_back(m[p]);
    best = solve_maxmin(sub);
    r = best.r;
  }
  throw std::runtime_error("matrix game: alternating solve failed to settle");
}

}  // namespace fbbai
