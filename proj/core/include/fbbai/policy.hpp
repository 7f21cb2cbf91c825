#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fbbai/bandit.hpp"
#include "fbbai/net.hpp"

namespace fbbai {

// Target-allocation provider for the tracking policy. Implementations are
// read-only after construction and safe to share across threads.
class AllocationSource {
 public:
  virtual ~AllocationSource() = default;
  virtual int k() const = 0;
  virtual std::string name() const = 0;
  // Writes r(q) onto out (k entries, on the simplex).
  virtual void allocation(std::span<const double> q, std::span<double> out) const = 0;
  std::vector<double> allocation_of(const std::vector<double>& q) const;
};

class FixedSource final : public AllocationSource {
 public:
  explicit FixedSource(std::vector<double> r);  // validates the simplex
  int k() const override { return static_cast<int>(r_.size()); }
  std::string name() const override { return "fixed"; }
  void allocation(std::span<const double> q, std::span<double> out) const override;

 private:
  std::vector<double> r_;
};

class NetworkSource final : public AllocationSource {
 public:
  explicit NetworkSource(NetParams params);
  int k() const override { return params_.k; }
  std::string name() const override { return "network"; }
  void allocation(std::span<const double> q, std::span<double> out) const override;
  const NetParams& params() const { return params_; }

 private:
  NetParams params_;
};

// Multilinear interpolation of per-grid-point allocations over a product
// grid; queries are clamped to the grid box first. Interpolated values stay
// on the simplex (convex combinations of simplex points).
class TableSource final : public AllocationSource {
 public:
  TableSource(std::vector<std::vector<double>> grids, std::vector<std::vector<double>> table);
  int k() const override { return static_cast<int>(grids_.size()); }
  std::string name() const override { return "table"; }
  void allocation(std::span<const double> q, std::span<double> out) const override;
  const std::vector<std::vector<double>>& grids() const { return grids_; }

 private:
  std::vector<std::vector<double>> grids_;
  std::vector<std::vector<double>> table_;  // row-major over the grid lattice
  std::vector<std::size_t> stride_;
};

// A sequential fixed-budget policy. The harness calls reset once, then
// choose_arm exactly T times (updating the shared EmpiricalState after each
// pull), then recommend. choose_arm may advance internal schedule state;
// clone() must copy it so an enumeration can branch mid-trial.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void reset(int k, std::int64_t t_budget) = 0;
  virtual int choose_arm(const EmpiricalState& state) = 0;
  virtual int recommend(const EmpiricalState& state) const = 0;
  virtual std::unique_ptr<Policy> clone() const = 0;
  virtual std::string name() const = 0;
};

std::unique_ptr<Policy> make_uniform_policy();
std::unique_ptr<Policy> make_successive_rejects_policy();
std::unique_ptr<Policy> make_sequential_halving_policy();
std::unique_ptr<Policy> make_tracking_policy(std::shared_ptr<const AllocationSource> source);

// Parses "uniform" | "sr" | "sh" | "tnn:model.json" | "table:table.json" |
// "fixed:0.4,0.3,0.3". File-backed specs load eagerly so the prototype can
// be cloned cheaply per trial.
std::unique_ptr<Policy> make_policy(const std::string& spec, int k);

// Extracts the allocation source backing a tracking policy spec, or null
// for schedule policies.
std::shared_ptr<const AllocationSource> policy_source(const std::string& spec, int k);

// disc(t) = max_i |r_i(q(t)) - n_i(t)/t|.
double tracking_error(const AllocationSource& source, const EmpiricalState& state);

}  // namespace fbbai
