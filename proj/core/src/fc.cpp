#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fbbai/rates.hpp"

namespace fbbai {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double mixture_divergence_bernoulli(double alpha, double x, double y) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::domain_error("mixture divergence: alpha outside [0,1]");
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
    throw std::domain_error("mixture divergence: means outside [0,1]");
  if (x == y) return 0.0;
  // The objective alpha D(x||z) + (1-alpha) D(y||z) is convex in z with
  // derivative sign given by alpha (z-x) + (1-alpha) (z-y).
  double lo = std::min(x, y), hi = std::max(x, y);
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (alpha * (mid - x) + (1.0 - alpha) * (mid - y) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double z = 0.5 * (lo + hi);
  const double da = x == z ? 0.0 : kl_bernoulli(x, z);
  const double db = y == z ? 0.0 : kl_bernoulli(y, z);
  return alpha * da + (1.0 - alpha) * db;
}

namespace {

// Transportation cost of challenger a at star weight w and challenger
// weight x: (w + x) I_{w/(w+x)}(mu_star, mu_a). Zero at x = 0, increasing.
double challenger_cost(double w, double x, double mu_star, double mu_a) {
  if (x <= 0.0 || w <= 0.0) return 0.0;
  return (w + x) * mixture_divergence_bernoulli(w / (w + x), mu_star, mu_a);
}

// Smallest x with challenger_cost >= v, capped at budget.
double challenger_budget_for(double w, double v, double budget, double mu_star,
                             double mu_a) {
  double lo = 0.0, hi = budget;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (challenger_cost(w, mid, mu_star, mu_a) < v) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct FcInner {
  double value = 0.0;
  std::vector<double> x;  // per challenger
};

// For fixed star weight w, equalize the challenger costs at the highest
// level the remaining budget allows.
FcInner fc_inner(double w, const std::vector<double>& mu_a, double mu_star) {
  const double budget = 1.0 - w;
  FcInner inner;
  inner.x.assign(mu_a.size(), 0.0);
  if (budget <= 0.0 || w <= 0.0) return inner;
  double v_up = kInf;
  for (double mu : mu_a) v_up = std::min(v_up, challenger_cost(w, budget, mu_star, mu));
  double lo = 0.0, hi = v_up;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    double used = 0.0;
    for (double mu : mu_a) used += challenger_budget_for(w, mid, budget, mu_star, mu);
    if (used < budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  inner.value = 0.5 * (lo + hi);
  double used = 0.0;
  for (std::size_t a = 0; a < mu_a.size(); ++a) {
    inner.x[a] = challenger_budget_for(w, inner.value, budget, mu_star, mu_a[a]);
    used += inner.x[a];
  }
  // Bisection residue lands on the last challenger so the weights sum to 1.
  const double residue = budget - used;
  inner.x.back() = std::max(0.0, inner.x.back() + residue);
  return inner;
}

}  // namespace

FcResult fc_allocation(const BanditInstance& p, double tol) {
  validate_instance(p);
  if (p.family != Family::kBernoulli)
    throw std::domain_error("fixed-confidence allocation: Bernoulli only");
  if (best_arm_set(p.means).size() != 1)
    throw std::domain_error("fixed-confidence allocation: tied best arms");
  if (!(tol > 0.0)) throw std::invalid_argument("fixed-confidence allocation: bad tol");

  const int star = best_arm(p.means);
  const double mu_star = p.means[star];
  std::vector<double> mu_a;
  for (int i = 0; i < p.k(); ++i)
    if (i != star) mu_a.push_back(p.means[i]);

  const auto phi = [&](double w) { return fc_inner(w, mu_a, mu_star).value; };

  // Coarse scan then golden-section refinement of the star weight.
  const int scan = 128;
  double best_w = 0.5, best_v = -kInf;
  for (int jj = 1; jj < scan; ++jj) {
    const double w = static_cast<double>(jj) / scan;
    const double v = phi(w);
    if (v > best_v) {
      best_v = v;
      best_w = w;
    }
  }
  double lo = std::max(0.0, best_w - 1.0 / scan);
  double hi = std::min(1.0, best_w + 1.0 / scan);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
  double fa = phi(a), fb = phi(b);
  while (hi - lo > tol) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      b = lo + gr * (hi - lo);
      fb = phi(b);
    } else {
      hi = b;
      b = a;
      fb = fa;
      a = hi - gr * (hi - lo);
      fa = phi(a);
    }
  }
  const double w = fa > fb ? a : b;
  const FcInner inner = fc_inner(w, mu_a, mu_star);

  FcResult res;
  res.value = inner.value;
  res.r.assign(p.k(), 0.0);
  res.r[star] = w;
  std::size_t slot = 0;
  for (int i = 0; i < p.k(); ++i)
    if (i != star) res.r[i] = inner.x[slot++];
  return res;
}

double fc_fb_suboptimality_bound_at(double r0, double d, std::int64_t t, double slack) {
  if (!(r0 >= 0.0) || !(d >= 0.0) || t < 1)
    throw std::invalid_argument("suboptimality bound: bad arguments");
  return 0.5 * std::exp(-2.0 * static_cast<double>(t) * r0 * d * (1.0 + slack));
}

double fc_fb_suboptimality_bound(const BanditInstance& p1, const BanditInstance& p2,
                                 std::int64_t t, double slack) {
  validate_instance(p1);
  validate_instance(p2);
  if (p1.family != Family::kBernoulli || p2.family != Family::kBernoulli)
    throw std::domain_error("suboptimality bound: Bernoulli only");
  if (p1.k() != p2.k())
    throw std::invalid_argument("suboptimality bound: k mismatch");
  for (int i = 1; i < p1.k(); ++i)
    if (p1.means[i] != p2.means[i])
      throw std::invalid_argument("suboptimality bound: instances differ beyond arm 0");
  const FcResult fc = fc_allocation(p2);
  const double d = kl_bernoulli(p2.means[0], p1.means[0]);
  return fc_fb_suboptimality_bound_at(fc.r[0], d, t, slack);
}

}  // namespace fbbai
