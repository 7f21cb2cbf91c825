#pragma once

#include <vector>

#include "fbbai/bandit.hpp"

namespace fbbai {

// KL(Ber(q) || Ber(p)) in nats. Conventions: 0*log 0 = 0; positive mass
// against a zero gives +infinity. Inputs outside [0,1] throw.
double kl_bernoulli(double q, double p);

// KL between N(q, sigma^2) and N(p, sigma^2): (q-p)^2 / (2 sigma^2).
double kl_gaussian(double q, double p, double sigma);

// Family dispatch for D(q || p) on one arm.
double kl(Family family, double q, double p, double sigma = 1.0);

enum class ComplexityKind { kH1, kH2, kConstant };

struct Complexity {
  ComplexityKind kind = ComplexityKind::kH1;
  double constant = 1.0;  // used only by kConstant
};

// H1: sum over arms other than the representative best of gap^-2 (+inf on a
// tied best arm). H2: max over sorted-gap ranks i >= 2 of i * gap_(i)^-2,
// the Audibert indexing where the best arm's zero gap is skipped.
double complexity(const Complexity& measure, const std::vector<double>& means);
double complexity(const Complexity& measure, const BanditInstance& instance);

// H(P) * sum_i r_i * D(q_i || p_i). Terms with r_i == 0 contribute zero even
// when the divergence is infinite; an all-zero sum returns 0 regardless of H.
double rate_objective(const BanditInstance& p, const std::vector<double>& q_means,
                      const std::vector<double>& r, const Complexity& h);

}  // namespace fbbai
