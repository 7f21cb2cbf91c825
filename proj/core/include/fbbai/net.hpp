#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fbbai/bandit.hpp"
#include "fbbai/divergence.hpp"

namespace fbbai {

// The allocation network maps empirical means to a point on the K-simplex.
// Shape K -> 3K -> 3K -> K, ReLU activations, an identity skip over the
// second hidden layer, softmax head. Inputs are sorted descending before
// layer 1 and the output is routed back through the inverse permutation, so
// the function is permutation-equivariant by construction.

struct NetParams {
  int k = 0;
  std::vector<double> w1, b1;  // 3K x K, 3K
  std::vector<double> w2, b2;  // 3K x 3K, 3K
  std::vector<double> w3, b3;  // K x 3K, K

  int hidden() const { return 3 * k; }
  std::size_t size() const {
    return w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size();
  }
};

NetParams zero_params(int k);
NetParams he_init(int k, std::uint64_t seed);

// Scratch buffers reused across forward/backward calls.
struct NetWorkspace {
  std::vector<int> order;  // sorted position -> original arm index
  std::vector<double> x, a1, h1, a2, h2, z, r;
  std::vector<double> dz, dh2, da2, dh1, da1, coeff;
  void resize(int k);
};

// Allocation r(q); writes k entries to out. Throws on NaN input.
void net_forward(const NetParams& params, std::span<const double> q,
                 std::span<double> out, NetWorkspace& ws);
std::vector<double> net_forward(const NetParams& params, const std::vector<double>& q);

// H(p) * sum_i r_i(q) * D(q_i || p_i). Returns +inf when any positive-weight
// divergence is infinite; the trainer rejects such pairs.
double net_loss(const NetParams& params, const BanditInstance& p,
                const std::vector<double>& q, const Complexity& h, NetWorkspace& ws);

struct NetGrad {
  std::vector<double> w1, b1, w2, b2, w3, b3;
  void resize_like(const NetParams& params);
  void zero();
};

// Exact reverse-mode gradient of net_loss in theta. The divergence terms are
// constants of theta, so dL/dz_j = r_j (c_j - sum_k r_k c_k) at the softmax.
// Returns the loss value.
double net_backward(const NetParams& params, const BanditInstance& p,
                    const std::vector<double>& q, const Complexity& h,
                    NetGrad& grad, NetWorkspace& ws);

// Decoupled-weight-decay Adam (bias-corrected moments, decay applied
// directly to the parameters).
struct AdamW {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-7;
  std::int64_t step = 0;
  std::vector<double> m, v;  // flat over w1|b1|w2|b2|w3|b3

  void init(const NetParams& params);
  void update(NetParams& params, const NetGrad& grad);
};

// A trained model with the metadata needed to use it as a policy source.
struct Checkpoint {
  int version = 1;
  NetParams params;
  Family family = Family::kBernoulli;
  double sigma = 1.0;
  Complexity h;
  std::uint64_t seed = 0;
  bool has_optimizer = false;
  AdamW optimizer;
};

// JSON round-trip is bit-exact on every weight. Loading validates version
// and dimension consistency.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace fbbai
