#include "fbbai/divergence.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fbbai {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double kl_bernoulli(double q, double p) {
  if (!(q >= 0.0 && q <= 1.0) || !(p >= 0.0 && p <= 1.0))
    throw std::domain_error("kl_bernoulli arguments must lie in [0,1]");
  if (q == p) return 0.0;
  // q != p past here, so q > 0 against p == 0 (or 1-q > 0 against p == 1)
  // carries positive mass where p has none.
  if (p == 0.0 || p == 1.0) return kInf;
  double s = 0.0;
  if (q > 0.0) s += q * std::log(q / p);
  if (q < 1.0) s += (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
  return s;
}

double kl_gaussian(double q, double p, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("sigma must be positive");
  const double d = q - p;
  return d * d / (2.0 * sigma * sigma);
}

double kl(Family family, double q, double p, double sigma) {
  return family == Family::kBernoulli ? kl_bernoulli(q, p) : kl_gaussian(q, p, sigma);
}

double complexity(const Complexity& measure, const std::vector<double>& means) {
  if (means.size() < 2) throw std::domain_error("complexity needs K >= 2");
  switch (measure.kind) {
    case ComplexityKind::kConstant:
      if (!(measure.constant > 0.0))
        throw std::domain_error("constant complexity must be positive");
      return measure.constant;
    case ComplexityKind::kH1: {
      // Sum over all arms except the representative best. A tied best arm
      // contributes 1/0 and the measure is +inf.
      const int star = best_arm(means);
      const double top = means[star];
      double s = 0.0;
      for (int i = 0; i < static_cast<int>(means.size()); ++i) {
        if (i == star) continue;
        const double gap = top - means[i];
        if (gap <= 0.0) return kInf;
        s += 1.0 / (gap * gap);
      }
      return s;
    }
    case ComplexityKind::kH2: {
      // max_{i >= 2} i * gap_(i)^-2 over gaps sorted ascending; rank 1 is
      // the best arm's zero gap and is skipped.
      const std::vector<double> g = gaps(means);
      double best = 0.0;
      for (std::size_t i = 1; i < g.size(); ++i) {
        if (g[i] <= 0.0) return kInf;
        best = std::max(best, static_cast<double>(i + 1) / (g[i] * g[i]));
      }
      return best;
    }
  }
  throw std::logic_error("unreachable complexity kind");
}

double complexity(const Complexity& measure, const BanditInstance& instance) {
  return complexity(measure, instance.means);
}

double rate_objective(const BanditInstance& p, const std::vector<double>& q_means,
                      const std::vector<double>& r, const Complexity& h) {
  if (q_means.size() != p.means.size() || r.size() != p.means.size())
    throw std::invalid_argument("rate_objective dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] == 0.0) continue;  // 0 * inf reads as 0 here
    s += r[i] * kl(p.family, q_means[i], p.means[i], p.sigma);
  }
  if (s == 0.0) return 0.0;
  return complexity(h, p.means) * s;
}

}  // namespace fbbai
