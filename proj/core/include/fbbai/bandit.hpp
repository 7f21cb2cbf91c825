#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fbbai/rng.hpp"

namespace fbbai {

enum class Family { kBernoulli, kGaussian };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// A bandit instance: per-arm means plus the reward family. Gaussian arms
// share one known standard deviation.
struct BanditInstance {
  Family family = Family::kBernoulli;
  std::vector<double> means;
  double sigma = 1.0;

  int k() const { return static_cast<int>(means.size()); }
};

BanditInstance make_bernoulli(std::vector<double> means);
BanditInstance make_gaussian(std::vector<double> means, double sigma);

// Throws std::domain_error on K < 2, Bernoulli means outside [0,1], or
// sigma <= 0.
void validate_instance(const BanditInstance& instance);

// Indices whose mean is >= max(means) - tol, ascending. The deterministic
// representative best arm is the first element.
std::vector<int> best_arm_set(const std::vector<double>& means, double tol = 0.0);
int best_arm(const std::vector<double>& means);
bool is_error(const std::vector<double>& true_means, int recommended);

// All K gaps max(means) - means[i], sorted ascending; gaps[0] == 0.
std::vector<double> gaps(const std::vector<double>& means);

// Pull counts and running means, updated one reward at a time.
struct EmpiricalState {
  std::int64_t t = 0;
  std::vector<std::int64_t> counts;
  std::vector<double> sums;
  std::vector<double> means;  // sums/counts; 0 until the arm is pulled

  void reset(int k);
  void update(int arm, double reward);
  int k() const { return static_cast<int>(counts.size()); }
};

// One independent deterministic substream per arm: the n-th reward of arm i
// depends only on (seed, trial, i, n), never on how pulls interleave.
class RewardStream {
 public:
  RewardStream(std::uint64_t seed, std::uint64_t trial, int k);

  double draw(const BanditInstance& instance, int arm);
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::vector<Xoshiro256> arm_rng_;
};

double sample_reward(RewardStream& stream, const BanditInstance& instance, int arm);

}  // namespace fbbai
