#include "fbbai/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "fbbai/io.hpp"

namespace fbbai {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_k(int k) {
  if (k < 2) throw std::invalid_argument("network needs k >= 2");
}
}  // namespace

NetParams zero_params(int k) {
  check_k(k);
  NetParams p;
  p.k = k;
  const int h = 3 * k;
  p.w1.assign(static_cast<std::size_t>(h) * k, 0.0);
  p.b1.assign(h, 0.0);
  p.w2.assign(static_cast<std::size_t>(h) * h, 0.0);
  p.b2.assign(h, 0.0);
  p.w3.assign(static_cast<std::size_t>(k) * h, 0.0);
  p.b3.assign(k, 0.0);
  return p;
}

NetParams he_init(int k, std::uint64_t seed) {
  NetParams p = zero_params(k);
  Xoshiro256 rng(seed);
  const auto fill = [&rng](std::vector<double>& w, int fan_in) {
    const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& x : w) x = scale * rng.gaussian();
  };
  fill(p.w1, k);
  fill(p.w2, 3 * k);
  fill(p.w3, 3 * k);
  return p;
}

void NetWorkspace::resize(int k) {
  const int h = 3 * k;
  order.resize(k);
  x.resize(k);
  a1.resize(h);
  h1.resize(h);
  a2.resize(h);
  h2.resize(h);
  z.resize(k);
  r.resize(k);
  dz.resize(k);
  dh2.resize(h);
  da2.resize(h);
  dh1.resize(h);
  da1.resize(h);
  coeff.resize(k);
}

namespace {

// Shared forward pass; leaves sorted-space activations in ws.
void forward_core(const NetParams& p, std::span<const double> q, NetWorkspace& ws) {
  const int k = p.k;
  const int h = 3 * k;
  if (static_cast<int>(q.size()) != k)
    throw std::invalid_argument("forward input size != k");
  for (double v : q) {
    if (std::isnan(v)) throw std::domain_error("forward input is NaN");
  }

  ws.resize(k);
  std::iota(ws.order.begin(), ws.order.end(), 0);
  // Descending by value, ties by original index; canonical input order.
  std::stable_sort(ws.order.begin(), ws.order.end(),
                   [&q](int a, int b) { return q[a] > q[b]; });
  for (int j = 0; j < k; ++j) ws.x[j] = q[ws.order[j]];

  for (int row = 0; row < h; ++row) {
    double s = p.b1[row];
    const double* w = &p.w1[static_cast<std::size_t>(row) * k];
    for (int c = 0; c < k; ++c) s += w[c] * ws.x[c];
    ws.a1[row] = s;
    ws.h1[row] = s > 0.0 ? s : 0.0;
  }
  for (int row = 0; row < h; ++row) {
    double s = p.b2[row];
    const double* w = &p.w2[static_cast<std::size_t>(row) * h];
    for (int c = 0; c < h; ++c) s += w[c] * ws.h1[c];
    ws.a2[row] = s;
    ws.h2[row] = (s > 0.0 ? s : 0.0) + ws.h1[row];  // identity skip
  }
  for (int row = 0; row < k; ++row) {
    double s = p.b3[row];
    const double* w = &p.w3[static_cast<std::size_t>(row) * h];
    for (int c = 0; c < h; ++c) s += w[c] * ws.h2[c];
    ws.z[row] = s;
  }

  const double zmax = *std::max_element(ws.z.begin(), ws.z.end());
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    ws.r[j] = std::exp(ws.z[j] - zmax);
    total += ws.r[j];
  }
  for (int j = 0; j < k; ++j) ws.r[j] /= total;
}

}  // namespace

void net_forward(const NetParams& p, std::span<const double> q,
                 std::span<double> out, NetWorkspace& ws) {
  forward_core(p, q, ws);
  for (int j = 0; j < p.k; ++j) out[ws.order[j]] = ws.r[j];
}

std::vector<double> net_forward(const NetParams& p, const std::vector<double>& q) {
  NetWorkspace ws;
  std::vector<double> out(p.k);
  net_forward(p, q, out, ws);
  return out;
}

double net_loss(const NetParams& p, const BanditInstance& inst,
                const std::vector<double>& q, const Complexity& h, NetWorkspace& ws) {
  const double hv = complexity(h, inst.means);
  if (!std::isfinite(hv)) return kInf;
  forward_core(p, q, ws);
  // Softmax outputs are strictly positive, so any infinite divergence makes
  // the loss infinite (the reject-pair signal).
  double loss = 0.0;
  for (int j = 0; j < p.k; ++j) {
    const int arm = ws.order[j];
    const double d = kl(inst.family, q[arm], inst.means[arm], inst.sigma);
    if (!std::isfinite(d)) return kInf;
    loss += ws.r[j] * hv * d;
  }
  return loss;
}

void NetGrad::resize_like(const NetParams& p) {
  w1.assign(p.w1.size(), 0.0);
  b1.assign(p.b1.size(), 0.0);
  w2.assign(p.w2.size(), 0.0);
  b2.assign(p.b2.size(), 0.0);
  w3.assign(p.w3.size(), 0.0);
  b3.assign(p.b3.size(), 0.0);
}

void NetGrad::zero() {
  std::fill(w1.begin(), w1.end(), 0.0);
  std::fill(b1.begin(), b1.end(), 0.0);
  std::fill(w2.begin(), w2.end(), 0.0);
  std::fill(b2.begin(), b2.end(), 0.0);
  std::fill(w3.begin(), w3.end(), 0.0);
  std::fill(b3.begin(), b3.end(), 0.0);
}

double net_backward(const NetParams& p, const BanditInstance& inst,
                    const std::vector<double>& q, const Complexity& h,
                    NetGrad& grad, NetWorkspace& ws) {
  const int k = p.k;
  const int hd = 3 * k;
  const double hv = complexity(h, inst.means);
  if (!std::isfinite(hv))
    throw std::invalid_argument("backward needs a finite complexity value");

  forward_core(p, q, ws);
  grad.resize_like(p);

  // Divergence coefficients in sorted space; constants w.r.t. theta.
  double loss = 0.0;
  for (int j = 0; j < k; ++j) {
    const int arm = ws.order[j];
    const double d = kl(inst.family, q[arm], inst.means[arm], inst.sigma);
    if (!std::isfinite(d))
      throw std::invalid_argument("backward on a rejected (infinite KL) pair");
    ws.coeff[j] = hv * d;
    loss += ws.r[j] * ws.coeff[j];
  }

  // Softmax of a linear functional: dL/dz_j = r_j (c_j - sum_l r_l c_l).
  for (int j = 0; j < k; ++j) ws.dz[j] = ws.r[j] * (ws.coeff[j] - loss);

  for (int row = 0; row < k; ++row) {
    double* gw = &grad.w3[static_cast<std::size_t>(row) * hd];
    for (int c = 0; c < hd; ++c) gw[c] = ws.dz[row] * ws.h2[c];
    grad.b3[row] = ws.dz[row];
  }
  for (int c = 0; c < hd; ++c) {
    double s = 0.0;
    for (int row = 0; row < k; ++row)
      s += p.w3[static_cast<std::size_t>(row) * hd + c] * ws.dz[row];
    ws.dh2[c] = s;
  }

  for (int row = 0; row < hd; ++row)
    ws.da2[row] = ws.a2[row] > 0.0 ? ws.dh2[row] : 0.0;
  for (int row = 0; row < hd; ++row) {
    double* gw = &grad.w2[static_cast<std::size_t>(row) * hd];
    for (int c = 0; c < hd; ++c) gw[c] = ws.da2[row] * ws.h1[c];
    grad.b2[row] = ws.da2[row];
  }
  // h1 feeds both the relu branch and the skip.
  for (int c = 0; c < hd; ++c) {
    double s = ws.dh2[c];
    for (int row = 0; row < hd; ++row)
      s += p.w2[static_cast<std::size_t>(row) * hd + c] * ws.da2[row];
    ws.dh1[c] = s;
  }

  for (int row = 0; row < hd; ++row)
    ws.da1[row] = ws.a1[row] > 0.0 ? ws.dh1[row] : 0.0;
  for (int row = 0; row < hd; ++row) {
    double* gw = &grad.w1[static_cast<std::size_t>(row) * k];
    for (int c = 0; c < k; ++c) gw[c] = ws.da1[row] * ws.x[c];
    grad.b1[row] = ws.da1[row];
  }
  return loss;
}

void AdamW::init(const NetParams& p) {
  step = 0;
  m.assign(p.size(), 0.0);
  v.assign(p.size(), 0.0);
}

void AdamW::update(NetParams& p, const NetGrad& g) {
  if (m.size() != p.size())
    throw std::invalid_argument("optimizer state shaped for a different net");
  step += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  std::size_t off = 0;
  const auto apply = [&](std::vector<double>& theta, const std::vector<double>& grad) {
    for (std::size_t i = 0; i < theta.size(); ++i, ++off) {
      m[off] = beta1 * m[off] + (1.0 - beta1) * grad[i];
      v[off] = beta2 * v[off] + (1.0 - beta2) * grad[i] * grad[i];
      const double mhat = m[off] / bc1;
      const double vhat = v[off] / bc2;
      theta[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * theta[i]);
    }
  };
  apply(p.w1, g.w1);
  apply(p.b1, g.b1);
  apply(p.w2, g.w2);
  apply(p.b2, g.b2);
  apply(p.w3, g.w3);
  apply(p.b3, g.b3);
}

namespace {

using nlohmann::ordered_json;

ordered_json dump_params(const NetParams& p) {
  ordered_json j;
  j["dims"] = {p.k, 3 * p.k, 3 * p.k, p.k};
  j["weights"] = {p.w1, p.w2, p.w3};
  j["biases"] = {p.b1, p.b2, p.b3};
  return j;
}

std::vector<double> want_array(const ordered_json& a, std::size_t n, const char* what) {
  if (!a.is_array() || a.size() != n)
    throw std::invalid_argument(std::string("checkpoint: bad size for ") + what);
  return a.get<std::vector<double>>();
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  ordered_json j;
  j["version"] = ckpt.version;
  j["k"] = ckpt.params.k;
  j["family"] = family_name(ckpt.family);
  j["sigma"] = ckpt.sigma;
  j["complexity"] = complexity_name(ckpt.h);
  j["seed"] = ckpt.seed;
  j.update(dump_params(ckpt.params));
  if (ckpt.has_optimizer) {
    ordered_json o;
    o["step"] = ckpt.optimizer.step;
    o["lr"] = ckpt.optimizer.lr;
    o["beta1"] = ckpt.optimizer.beta1;
    o["beta2"] = ckpt.optimizer.beta2;
    o["eps"] = ckpt.optimizer.eps;
    o["weight_decay"] = ckpt.optimizer.weight_decay;
    o["m"] = ckpt.optimizer.m;
    o["v"] = ckpt.optimizer.v;
    j["optimizer"] = std::move(o);
  }
  write_file(path, j.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("checkpoint " + path + ": " + e.what());
  }
  if (!j.contains("version"))
    throw std::runtime_error("checkpoint " + path + ": missing version field");
  Checkpoint c;
  c.version = j["version"].get<int>();
  if (c.version != 1)
    throw std::runtime_error("checkpoint " + path + ": unsupported version");

  const int k = j.at("k").get<int>();
  check_k(k);
  const auto dims = j.at("dims").get<std::vector<int>>();
  const std::vector<int> want{k, 3 * k, 3 * k, k};
  if (dims != want)
    throw std::invalid_argument("checkpoint " + path + ": dims inconsistent with k");

  c.family = family_from_name(j.at("family").get<std::string>());
  c.sigma = j.value("sigma", 1.0);
  c.h = complexity_from_name(j.at("complexity").get<std::string>());
  c.seed = j.value("seed", std::uint64_t{0});

  c.params = zero_params(k);
  const auto& w = j.at("weights");
  const auto& b = j.at("biases");
  if (!w.is_array() || w.size() != 3 || !b.is_array() || b.size() != 3)
    throw std::invalid_argument("checkpoint " + path + ": expected 3 weight/bias layers");
  const std::size_t h = static_cast<std::size_t>(3) * k;
  c.params.w1 = want_array(w[0], h * k, "w1");
  c.params.w2 = want_array(w[1], h * h, "w2");
  c.params.w3 = want_array(w[2], static_cast<std::size_t>(k) * h, "w3");
  c.params.b1 = want_array(b[0], h, "b1");
  c.params.b2 = want_array(b[1], h, "b2");
  c.params.b3 = want_array(b[2], static_cast<std::size_t>(k), "b3");

  if (j.contains("optimizer")) {
    const auto& o = j["optimizer"];
    c.has_optimizer = true;
    c.optimizer.step = o.at("step").get<std::int64_t>();
    c.optimizer.lr = o.at("lr").get<double>();
    c.optimizer.beta1 = o.at("beta1").get<double>();
    c.optimizer.beta2 = o.at("beta2").get<double>();
    c.optimizer.eps = o.at("eps").get<double>();
    c.optimizer.weight_decay = o.at("weight_decay").get<double>();
    c.optimizer.m = want_array(o.at("m"), c.params.size(), "optimizer.m");
    c.optimizer.v = want_array(o.at("v"), c.params.size(), "optimizer.v");
  }
  return c;
}

}  // namespace fbbai
