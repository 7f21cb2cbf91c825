#include "fbbai/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fbbai/io.hpp"

namespace fbbai {

std::vector<double> AllocationSource::allocation_of(const std::vector<double>& q) const {
  std::vector<double> out(k());
  allocation(std::span<const double>(q), std::span<double>(out));
  return out;
}

namespace {

void check_out(const AllocationSource& src, std::span<const double> q,
               std::span<double> out) {
  if (static_cast<int>(q.size()) != src.k() || static_cast<int>(out.size()) != src.k())
    throw std::invalid_argument("allocation buffer size != k");
}

std::vector<double> normalized_simplex(std::vector<double> r, const char* what) {
  if (r.size() < 2) throw std::invalid_argument(std::string(what) + ": needs k >= 2");
  double sum = 0.0;
  for (double v : r) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument(std::string(what) + ": entries must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument(std::string(what) + ": entries must sum to 1");
  for (double& v : r) v /= sum;
  return r;
}

}  // namespace

FixedSource::FixedSource(std::vector<double> r)
    : r_(normalized_simplex(std::move(r), "fixed allocation")) {}

void FixedSource::allocation(std::span<const double> q, std::span<double> out) const {
  check_out(*this, q, out);
  std::copy(r_.begin(), r_.end(), out.begin());
}

NetworkSource::NetworkSource(NetParams params) : params_(std::move(params)) {
  if (params_.k < 2) throw std::invalid_argument("network allocation: needs k >= 2");
}

void NetworkSource::allocation(std::span<const double> q, std::span<double> out) const {
  check_out(*this, q, out);
  // Scratch reuse; the source itself stays read-only and shareable.
  static thread_local NetWorkspace ws;
  net_forward(params_, q, out, ws);
}

TableSource::TableSource(std::vector<std::vector<double>> grids,
                         std::vector<std::vector<double>> table)
    : grids_(std::move(grids)), table_(std::move(table)) {
  const int k = static_cast<int>(grids_.size());
  if (k < 2) throw std::invalid_argument("table allocation: needs k >= 2");
  std::size_t cells = 1;
  for (const auto& g : grids_) {
    if (g.empty()) throw std::invalid_argument("table allocation: empty grid axis");
    for (std::size_t i = 1; i < g.size(); ++i)
      if (!(g[i] > g[i - 1]))
        throw std::invalid_argument("table allocation: grid axis not strictly ascending");
    cells *= g.size();
  }
  if (table_.size() != cells)
    throw std::invalid_argument("table allocation: table size != grid lattice size");
  for (auto& row : table_) row = normalized_simplex(std::move(row), "table row");
  // Row-major lattice, arm 0 most significant.
  stride_.assign(k, 1);
  for (int d = k - 2; d >= 0; --d) stride_[d] = stride_[d + 1] * grids_[d + 1].size();
}

void TableSource::allocation(std::span<const double> q, std::span<double> out) const {
  check_out(*this, q, out);
  const int k = static_cast<int>(grids_.size());
  // Clamp to the grid box, then locate the cell and the in-cell weight per
  // axis. Clamping is the nearest-neighbor rule outside the box.
  std::vector<std::size_t> lo(k);
  std::vector<double> w(k);
  for (int d = 0; d < k; ++d) {
    const auto& g = grids_[d];
    double v = std::clamp(q[d], g.front(), g.back());
    if (std::isnan(q[d])) throw std::domain_error("table allocation: NaN input");
    if (g.size() == 1) {
      lo[d] = 0;
      w[d] = 0.0;
      continue;
    }
    std::size_t hi = std::upper_bound(g.begin(), g.end(), v) - g.begin();
    hi = std::clamp<std::size_t>(hi, 1, g.size() - 1);
    lo[d] = hi - 1;
    w[d] = (v - g[lo[d]]) / (g[hi] - g[lo[d]]);
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t corner = 0; corner < (std::size_t{1} << k); ++corner) {
    double coeff = 1.0;
    std::size_t flat = 0;
    for (int d = 0; d < k; ++d) {
      const bool up = (corner >> d) & 1;
      coeff *= up ? w[d] : 1.0 - w[d];
      std::size_t idx = lo[d] + (up ? 1 : 0);
      if (idx >= grids_[d].size()) idx = grids_[d].size() - 1;  // single-point axis
      flat += idx * stride_[d];
    }
    if (coeff == 0.0) continue;
    const auto& row = table_[flat];
    for (int i = 0; i < static_cast<int>(out.size()); ++i) out[i] += coeff * row[i];
  }
}

namespace {

// Best pulled arm among candidates, lowest index at ties; falls back to the
// lowest candidate before anything is pulled.
int best_pulled(const EmpiricalState& state, const std::vector<int>& candidates) {
  int best = -1;
  double best_mean = 0.0;
  for (int arm : candidates) {
    if (state.counts[arm] == 0) continue;
    if (best < 0 || state.means[arm] > best_mean) {
      best = arm;
      best_mean = state.means[arm];
    }
  }
  return best >= 0 ? best : candidates.front();
}

std::vector<int> all_arms(int k) {
  std::vector<int> v(k);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

class UniformPolicy final : public Policy {
 public:
  void reset(int k, std::int64_t t_budget) override {
    if (k < 2) throw std::invalid_argument("uniform: needs k >= 2");
    if (t_budget < 1) throw std::invalid_argument("uniform: needs T >= 1");
    k_ = k;
  }
  int choose_arm(const EmpiricalState& state) override {
    return static_cast<int>(state.t % k_);
  }
  int recommend(const EmpiricalState& state) const override {
    return best_pulled(state, all_arms(k_));
  }
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<UniformPolicy>(*this);
  }
  std::string name() const override { return "uniform"; }

 private:
  int k_ = 0;
};

// Shared elimination-schedule machinery: fixed per-phase per-arm pull counts
// with the last phase sized to land exactly on T, round-robin in ascending
// arm order inside a phase, one elimination step between phases.
class EliminationPolicy : public Policy {
 public:
  int choose_arm(const EmpiricalState& state) override {
    // Eliminations are lazy: a phase's last reward only reaches the state
    // before the next call, so boundaries are processed here.
    while (phase_left_ == 0 && phase_ + 1 < static_cast<int>(phase_pulls_.size())) {
      eliminate(state);
      ++phase_;
      start_phase();
    }
    if (phase_left_ == 0)
      throw std::logic_error("elimination schedule exhausted before T");
    --phase_left_;
    const int arm = active_[round_pos_];
    round_pos_ = (round_pos_ + 1) % active_.size();
    return arm;
  }

  int recommend(const EmpiricalState& state) const override {
    return best_pulled(state, active_);
  }

 protected:
  // phase_pulls[p] = total pulls in phase p; eliminate_count[p] arms leave
  // after phase p. Derived resets fill these and call start_run.
  void start_run(int k, std::vector<std::int64_t> phase_pulls,
                 std::vector<int> eliminate_count) {
    k_ = k;
    active_ = all_arms(k);
    phase_pulls_ = std::move(phase_pulls);
    eliminate_ = std::move(eliminate_count);
    phase_ = 0;
    start_phase();
  }

 private:
  void start_phase() {
    phase_left_ = phase_pulls_[phase_];
    round_pos_ = 0;
  }

  void eliminate(const EmpiricalState& state) {
    for (int n = 0; n < eliminate_[phase_]; ++n) {
      if (active_.size() <= 1) return;
      // Empirical worst leaves; the lowest index stays on ties.
      std::size_t worst = 0;
      for (std::size_t i = 1; i < active_.size(); ++i)
        if (state.means[active_[i]] <= state.means[active_[worst]]) worst = i;
      active_.erase(active_.begin() + worst);
    }
  }

  int k_ = 0;
  std::vector<int> active_;
  std::vector<std::int64_t> phase_pulls_;
  std::vector<int> eliminate_;
  int phase_ = 0;
  std::int64_t phase_left_ = 0;
  std::size_t round_pos_ = 0;
};

class SuccessiveRejectsPolicy final : public EliminationPolicy {
 public:
  void reset(int k, std::int64_t t_budget) override {
    if (k < 2) throw std::invalid_argument("successive-rejects: needs k >= 2");
    if (t_budget < k + 1)
      throw std::invalid_argument("successive-rejects: needs T >= K+1");

    double logbar = 0.5;
    for (int i = 2; i <= k; ++i) logbar += 1.0 / i;

    // Cumulative per-arm targets n_p = ceil((T-K)/(logbar*(K+1-p))); the
    // epsilon guards exact-integer quotients against FP roundoff.
    std::vector<std::int64_t> n(k, 0);
    for (int p = 1; p <= k - 2; ++p) {
      const double raw =
          static_cast<double>(t_budget - k) / (logbar * (k + 1 - p));
      n[p] = std::max<std::int64_t>(
          n[p - 1], static_cast<std::int64_t>(std::ceil(raw - 1e-9)));
    }

    std::vector<std::int64_t> pulls;
    std::vector<int> elim;
    std::int64_t spent = 0;
    for (int p = 1; p <= k - 2; ++p) {
      const std::int64_t arms = k + 1 - p;
      std::int64_t total = (n[p] - n[p - 1]) * arms;
      total = std::min(total, t_budget - spent);
      spent += total;
      pulls.push_back(total);
      elim.push_back(1);
    }
    // Last phase (two survivors) absorbs the remaining budget exactly.
    pulls.push_back(t_budget - spent);
    elim.push_back(0);
    start_run(k, std::move(pulls), std::move(elim));
  }

  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<SuccessiveRejectsPolicy>(*this);
  }
  std::string name() const override { return "sr"; }
};

class SequentialHalvingPolicy final : public EliminationPolicy {
 public:
  void reset(int k, std::int64_t t_budget) override {
    if (k < 2) throw std::invalid_argument("sequential-halving: needs k >= 2");
    int rounds = 0;
    for (int s = 1; s < k; s *= 2) ++rounds;
    if (t_budget < static_cast<std::int64_t>(k) * rounds)
      throw std::invalid_argument("sequential-halving: needs T >= K*ceil(log2 K)");

    std::vector<std::int64_t> pulls;
    std::vector<int> elim;
    std::int64_t spent = 0;
    int size = k;
    for (int r = 0; r < rounds; ++r) {
      const std::int64_t per_arm = t_budget / (static_cast<std::int64_t>(size) * rounds);
      pulls.push_back(per_arm * size);
      spent += pulls.back();
      const int keep = (size + 1) / 2;
      elim.push_back(size - keep);
      size = keep;
    }
    // Floor rounding leaves a remainder; the final round absorbs it.
    pulls.back() += t_budget - spent;
    elim.back() = 0;
    start_run(k, std::move(pulls), std::move(elim));
  }

  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<SequentialHalvingPolicy>(*this);
  }
  std::string name() const override { return "sh"; }
};

class TrackingPolicy final : public Policy {
 public:
  explicit TrackingPolicy(std::shared_ptr<const AllocationSource> source)
      : source_(std::move(source)) {
    if (!source_) throw std::invalid_argument("tracking: null allocation source");
  }

  void reset(int k, std::int64_t t_budget) override {
    if (k != source_->k())
      throw std::invalid_argument("tracking: source is for a different k");
    if (t_budget < 1) throw std::invalid_argument("tracking: needs T >= 1");
    k_ = k;
  }

  int choose_arm(const EmpiricalState& state) override {
    if (state.t < k_) return static_cast<int>(state.t);  // draw each arm once
    static thread_local std::vector<double> r;
    r.resize(k_);
    source_->allocation(std::span<const double>(state.means), std::span<double>(r));
    // argmax_i { r_i(Q(t)) - N_i(t)/t }, lowest index on ties.
    int best = 0;
    double best_score = r[0] - static_cast<double>(state.counts[0]) / state.t;
    for (int i = 1; i < k_; ++i) {
      const double score = r[i] - static_cast<double>(state.counts[i]) / state.t;
      if (score > best_score) {
        best = i;
        best_score = score;
      }
    }
    return best;
  }

  int recommend(const EmpiricalState& state) const override {
    return best_pulled(state, all_arms(k_));
  }

  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<TrackingPolicy>(*this);
  }
  std::string name() const override { return "tracking:" + source_->name(); }

 private:
  std::shared_ptr<const AllocationSource> source_;
  int k_ = 0;
};

std::shared_ptr<const AllocationSource> table_from_json(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("table " + path + ": " + e.what());
  }
  if (!j.contains("grids") || !j.contains("table"))
    throw std::runtime_error("table " + path + ": missing grids/table fields");
  return std::make_shared<TableSource>(
      j["grids"].get<std::vector<std::vector<double>>>(),
      j["table"].get<std::vector<std::vector<double>>>());
}

std::vector<double> parse_fixed_list(const std::string& body) {
  std::vector<double> r;
  std::stringstream ss(body);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("fixed allocation: bad number '" + tok + "'");
    }
    if (used != tok.size())
      throw std::invalid_argument("fixed allocation: bad number '" + tok + "'");
    r.push_back(v);
  }
  return r;
}

}  // namespace

std::unique_ptr<Policy> make_uniform_policy() { return std::make_unique<UniformPolicy>(); }

std::unique_ptr<Policy> make_successive_rejects_policy() {
  return std::make_unique<SuccessiveRejectsPolicy>();
}

std::unique_ptr<Policy> make_sequential_halving_policy() {
  return std::make_unique<SequentialHalvingPolicy>();
}

std::unique_ptr<Policy> make_tracking_policy(std::shared_ptr<const AllocationSource> source) {
  return std::make_unique<TrackingPolicy>(std::move(source));
}

std::shared_ptr<const AllocationSource> policy_source(const std::string& spec, int k) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);

  std::shared_ptr<const AllocationSource> src;
  if (head == "tnn") {
    const Checkpoint ckpt = load_checkpoint(body);
    src = std::make_shared<NetworkSource>(ckpt.params);
  } else if (head == "table") {
    src = table_from_json(body);
  } else if (head == "fixed") {
    src = std::make_shared<FixedSource>(parse_fixed_list(body));
  } else {
    return nullptr;
  }
  if (src->k() != k)
    throw std::invalid_argument("policy '" + spec + "' is for k=" +
                                std::to_string(src->k()) + ", instance has k=" +
                                std::to_string(k));
  return src;
}

std::unique_ptr<Policy> make_policy(const std::string& spec, int k) {
  if (spec == "uniform") return make_uniform_policy();
  if (spec == "sr") return make_successive_rejects_policy();
  if (spec == "sh") return make_sequential_halving_policy();
  auto src = policy_source(spec, k);
  if (!src) throw std::invalid_argument("unknown policy spec '" + spec + "'");
  return make_tracking_policy(std::move(src));
}

double tracking_error(const AllocationSource& source, const EmpiricalState& state) {
  if (state.t < 1) throw std::invalid_argument("tracking error needs t >= 1");
  const std::vector<double> r = source.allocation_of(state.means);
  double worst = 0.0;
  for (int i = 0; i < source.k(); ++i) {
    const double frac = static_cast<double>(state.counts[i]) / state.t;
    worst = std::max(worst, std::abs(r[i] - frac));
  }
  return worst;
}

}  // namespace fbbai
