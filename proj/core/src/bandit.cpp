#include "fbbai/bandit.hpp"

#include <algorithm>
#include <stdexcept>

namespace fbbai {

std::string family_name(Family f) {
  return f == Family::kBernoulli ? "bernoulli" : "gaussian";
}

Family family_from_name(const std::string& name) {
  if (name == "bernoulli") return Family::kBernoulli;
  if (name == "gaussian") return Family::kGaussian;
  throw std::invalid_argument("unknown family: " + name);
}

BanditInstance make_bernoulli(std::vector<double> means) {
  BanditInstance inst;
  inst.family = Family::kBernoulli;
  inst.means = std::move(means);
  validate_instance(inst);
  return inst;
}

BanditInstance make_gaussian(std::vector<double> means, double sigma) {
  BanditInstance inst;
  inst.family = Family::kGaussian;
  inst.means = std::move(means);
  inst.sigma = sigma;
  validate_instance(inst);
  return inst;
}

void validate_instance(const BanditInstance& instance) {
  if (instance.k() < 2) throw std::domain_error("instance needs at least 2 arms");
  if (instance.family == Family::kBernoulli) {
    for (double m : instance.means) {
      if (!(m >= 0.0 && m <= 1.0))
        throw std::domain_error("bernoulli mean outside [0,1]");
    }
  } else {
    if (!(instance.sigma > 0.0)) throw std::domain_error("sigma must be positive");
    for (double m : instance.means) {
      if (!std::isfinite(m)) throw std::domain_error("gaussian mean not finite");
    }
  }
}

std::vector<int> best_arm_set(const std::vector<double>& means, double tol) {
  if (means.empty()) throw std::domain_error("empty means");
  const double top = *std::max_element(means.begin(), means.end());
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(means.size()); ++i) {
    if (means[i] >= top - tol) out.push_back(i);
  }
  return out;
}

int best_arm(const std::vector<double>& means) {
  if (means.empty()) throw std::domain_error("empty means");
  int best = 0;
  for (int i = 1; i < static_cast<int>(means.size()); ++i) {
    if (means[i] > means[best]) best = i;
  }
  return best;
}

bool is_error(const std::vector<double>& true_means, int recommended) {
  const double top = *std::max_element(true_means.begin(), true_means.end());
  return true_means[recommended] < top;
}

std::vector<double> gaps(const std::vector<double>& means) {
  if (means.size() < 2) throw std::domain_error("gaps need K >= 2");
  const double top = *std::max_element(means.begin(), means.end());
  std::vector<double> g(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) g[i] = top - means[i];
  std::sort(g.begin(), g.end());
  return g;
}

void EmpiricalState::reset(int k) {
  t = 0;
  counts.assign(k, 0);
  sums.assign(k, 0.0);
  means.assign(k, 0.0);
}

void EmpiricalState::update(int arm, double reward) {
  if (arm < 0 || arm >= k()) throw std::out_of_range("arm index out of range");
  counts[arm] += 1;
  sums[arm] += reward;
  means[arm] = sums[arm] / static_cast<double>(counts[arm]);
  t += 1;
}

RewardStream::RewardStream(std::uint64_t seed, std::uint64_t trial, int k)
    : seed_(seed) {
  arm_rng_.reserve(k);
  for (int arm = 0; arm < k; ++arm) {
    arm_rng_.emplace_back(substream_key(seed, trial, static_cast<std::uint64_t>(arm)));
  }
}

double RewardStream::draw(const BanditInstance& instance, int arm) {
  if (arm < 0 || arm >= static_cast<int>(arm_rng_.size()))
    throw std::out_of_range("arm index out of range");
  Xoshiro256& rng = arm_rng_[arm];
  if (instance.family == Family::kBernoulli) {
    return rng.uniform01() < instance.means[arm] ? 1.0 : 0.0;
  }
  return instance.means[arm] + instance.sigma * rng.gaussian();
}

double sample_reward(RewardStream& stream, const BanditInstance& instance, int arm) {
  return stream.draw(instance, arm);
}

}  // namespace fbbai
