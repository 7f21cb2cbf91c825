#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fbbai/dot.hpp"
#include "fbbai/harness.hpp"
#include "fbbai/io.hpp"
#include "fbbai/net.hpp"
#include "fbbai/policy.hpp"
#include "fbbai/rates.hpp"
#include "fbbai/train.hpp"

namespace {

using namespace fbbai;

// "lo:hi:step" for a uniform axis, or "v1,v2,..." for an explicit one; the
// same axis applies to every arm.
GridSpec parse_grid(int k, const std::string& text) {
  if (text.find(':') != std::string::npos) {
    double lo = 0.0, hi = 0.0, step = 0.0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3)
      throw std::invalid_argument("grid: expected lo:hi:step in '" + text + "'");
    return uniform_grid(k, lo, hi, step);
  }
  std::vector<double> axis;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string token =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::size_t used = 0;
    axis.push_back(std::stod(token, &used));
    if (used != token.size())
      throw std::invalid_argument("grid: bad value '" + token + "'");
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  GridSpec grid;
  grid.arms.assign(k, axis);
  grid.validate();
  return grid;
}

TrainConfig parse_train_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("train config: ") + e.what());
  }
  TrainConfig cfg;
  cfg.k = j.value("k", cfg.k);
  if (j.contains("family")) cfg.family = family_from_name(j.at("family").get<std::string>());
  cfg.sigma = j.value("sigma", cfg.sigma);
  cfg.box_lo = j.value("box_lo", cfg.box_lo);
  cfg.box_hi = j.value("box_hi", cfg.box_hi);
  if (j.contains("complexity"))
    cfg.h = complexity_from_name(j.at("complexity").get<std::string>());
  cfg.n_true = j.value("n_true", cfg.n_true);
  cfg.n_emp = j.value("n_emp", cfg.n_emp);
  cfg.iters = j.value("iters", cfg.iters);
  cfg.checkpoint_every = j.value("checkpoint_every", cfg.checkpoint_every);
  cfg.eval_true = j.value("eval_true", cfg.eval_true);
  cfg.eval_emp = j.value("eval_emp", cfg.eval_emp);
  cfg.sort_true = j.value("sort_true", cfg.sort_true);
  cfg.share_q_per_class = j.value("share_q_per_class", cfg.share_q_per_class);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.rejection_cap = j.value("rejection_cap", cfg.rejection_cap);
  return cfg;
}

int cmd_simulate(const std::string& instance_path, const std::string& policy,
                 std::int64_t t_budget, std::int64_t trials, std::uint64_t seed,
                 int checkpoints, const std::string& out, int threads, bool disc,
                 double oracle_grid) {
  ExperimentConfig cfg;
  cfg.instance = load_instance(instance_path);
  cfg.policy_spec = policy;
  cfg.t_budget = t_budget;
  cfg.n_trials = trials;
  cfg.seed = seed;
  cfg.n_checkpoints = checkpoints;
  cfg.collect_disc = disc;
  cfg.threads = threads;
  cfg.oracle_grid_step = oracle_grid;

  const ExperimentReport report = run_experiment(cfg);
  emit_report(report, out);

  const CheckpointStats& last = report.checkpoints.back();
  std::printf("t=%lld poe=%.17g stderr=%.17g aborted=%lld\n",
              static_cast<long long>(last.t), last.poe, last.poe_stderr,
              static_cast<long long>(report.aborted));
  if (report.has_oracle)
    std::printf("oracle_exponent=%.17g\n", report.oracle_exponent);
  return report.aborted == 0 ? 0 : 1;
}

int cmd_enumerate(const std::string& instance_path, const std::string& policy,
                  std::int64_t t_budget) {
  const BanditInstance instance = load_instance(instance_path);
  const std::unique_ptr<Policy> proto = make_policy(policy, instance.k());
  std::printf("exact_poe=%.17g\n", exact_poe(*proto, instance, t_budget));
  return 0;
}

int cmd_rate(const std::string& model_path, const std::string& instance_path,
             double grid_step, double lo, double hi) {
  const BanditInstance instance = load_instance(instance_path);
  const Checkpoint ckpt = load_checkpoint(model_path);
  const NetworkSource source(ckpt.params);
  const GridSpec grid = uniform_grid(instance.k(), lo, hi, grid_step);
  std::printf("oracle_exponent=%.17g\n", oracle_exponent(source, instance, grid));
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& out,
              const std::string& progress, std::int64_t seed_override) {
  TrainConfig cfg =
      config_path.empty() ? TrainConfig{} : parse_train_config(read_file(config_path));
  if (!progress.empty()) cfg.progress_csv = progress;
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  const TrainResult result = train(cfg);
  save_checkpoint(result.selected, out);
  std::printf("checkpoints=%zu selected=%d iter=%lld score=%.17g\n",
              result.checkpoint_scores.size(), result.selected_index,
              static_cast<long long>(result.checkpoint_iters[result.selected_index]),
              result.checkpoint_scores[result.selected_index]);
  return 0;
}

int cmd_rgo_solve(int k, const std::string& qgrid, const std::string& pgrid,
                  const std::string& method_name, int batches, const std::string& h_name,
                  const std::string& family_str, double sigma, int r_mesh,
                  const std::string& out) {
  const GridSpec q = parse_grid(k, qgrid);
  const GridSpec p = parse_grid(k, pgrid);
  const Complexity h = complexity_from_name(h_name);
  const Family family = family_from_name(family_str);
  SolveMethod method;
  if (method_name == "exhaustive") {
    method = SolveMethod::kExhaustive;
  } else if (method_name == "alternating") {
    method = SolveMethod::kAlternating;
  } else {
    throw std::invalid_argument("method: expected exhaustive or alternating");
  }
  const DiscreteSolution sol =
      rgob_solve_discrete(batches, q, p, h, family, sigma, method, r_mesh);
  if (!out.empty()) save_solution(sol, out);
  std::printf("value=%.17g\n", sol.value);
  return 0;
}

int cmd_dot_sim(const std::string& instance_path, const std::string& solution_path,
                std::int64_t t_budget, std::int64_t trials, std::uint64_t seed,
                const std::string& out) {
  const BanditInstance instance = load_instance(instance_path);
  const DiscreteSolution sol = load_solution(solution_path);
  if (sol.k != instance.k())
    throw std::invalid_argument("dot-sim: solution and instance disagree on K");
  const std::unique_ptr<BatchRule> rule = solution_batch_rule(sol);
  std::int64_t errors = 0;
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    RewardStream stream(seed, static_cast<std::uint64_t>(trial), instance.k());
    const DotTrace trace = run_dot(*rule, instance, t_budget, stream);
    if (is_error(instance.means, trace.recommendation)) ++errors;
  }
  const double poe = static_cast<double>(errors) / static_cast<double>(trials);
  if (!out.empty()) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%lld,%lld,%.17g\n", static_cast<long long>(trials),
                  static_cast<long long>(errors), poe);
    write_file(out, std::string("trials,errors,poe\n") + buf);
  }
  std::printf("trials=%lld errors=%lld poe=%.17g\n", static_cast<long long>(trials),
              static_cast<long long>(errors), poe);
  return 0;
}

int cmd_fc_alloc(const std::string& instance_path, double tol, const std::string& out) {
  const BanditInstance instance = load_instance(instance_path);
  const FcResult res = fc_allocation(instance, tol);
  if (!out.empty()) {
    nlohmann::ordered_json j;
    j["r"] = res.r;
    j["value"] = res.value;
    write_file(out, j.dump(2) + "\n");
  }
  for (std::size_t i = 0; i < res.r.size(); ++i)
    std::printf("r[%zu]=%.17g\n", i, res.r[i]);
  std::printf("value=%.17g\n", res.value);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-budget best-arm identification toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo experiment");
  std::string sim_instance, sim_policy = "uniform", sim_out = "run.csv";
  std::int64_t sim_t = 2000, sim_trials = 100000;
  std::uint64_t sim_seed = 1;
  int sim_checkpoints = 50, sim_threads = 1;
  bool sim_disc = false;
  double sim_oracle = 0.0;
  sim->add_option("--instance", sim_instance, "Instance JSON")->required();
  sim->add_option("--policy", sim_policy, "uniform|sr|sh|tnn:F|table:F|fixed:LIST");
  sim->add_option("--T", sim_t, "Budget");
  sim->add_option("--trials", sim_trials, "Trial count");
  sim->add_option("--seed", sim_seed, "Master seed");
  sim->add_option("--checkpoints", sim_checkpoints, "Curve resolution");
  sim->add_option("--out", sim_out, "Output CSV path");
  sim->add_option("--threads", sim_threads, "Worker threads");
  sim->add_flag("--disc", sim_disc, "Collect tracking-error statistics");
  sim->add_option("--oracle-grid", sim_oracle, "Grid step for the oracle exponent line");

  // enumerate
  auto* enu = app.add_subcommand("enumerate", "Exact error probability");
  std::string enu_instance, enu_policy = "uniform";
  std::int64_t enu_t = 8;
  enu->add_option("--instance", enu_instance, "Instance JSON")->required();
  enu->add_option("--policy", enu_policy, "Policy spec");
  enu->add_option("--T", enu_t, "Budget (at most 20)");

  // rate
  auto* rate = app.add_subcommand("rate", "Oracle exponent of a trained model");
  std::string rate_model, rate_instance;
  double rate_grid = 0.005, rate_lo = 0.0, rate_hi = 1.0;
  rate->add_option("--model", rate_model, "Checkpoint JSON")->required();
  rate->add_option("--instance", rate_instance, "Instance JSON")->required();
  rate->add_option("--grid", rate_grid, "Grid step");
  rate->add_option("--lo", rate_lo, "Grid lower bound");
  rate->add_option("--hi", rate_hi, "Grid upper bound");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train an allocation network");
  std::string train_config, train_out = "model.json", train_progress;
  std::int64_t train_seed = -1;
  train_cmd->add_option("--config", train_config, "Training config JSON");
  train_cmd->add_option("--out", train_out, "Model output path");
  train_cmd->add_option("--progress", train_progress, "Progress CSV path");
  train_cmd->add_option("--seed", train_seed, "Seed override");

  // rgo-solve
  auto* solve = app.add_subcommand("rgo-solve", "Discretized minimax tables");
  // The complexity flag is spelled --h, so this subcommand keeps only the
  // long help spelling.
  solve->set_help_flag("--help", "Print help");
  int solve_k = 2, solve_batches = 1, solve_mesh = 64;
  std::string solve_qgrid, solve_pgrid, solve_method = "exhaustive";
  std::string solve_h = "const:1", solve_family = "bernoulli", solve_out;
  double solve_sigma = 1.0;
  solve->add_option("--k", solve_k, "Arm count")->required();
  solve->add_option("--qgrid", solve_qgrid, "lo:hi:step or v1,v2,...")->required();
  solve->add_option("--pgrid", solve_pgrid, "lo:hi:step or v1,v2,...")->required();
  solve->add_option("--method", solve_method, "exhaustive|alternating");
  solve->add_option("--batches", solve_batches, "1 or 2");
  solve->add_option("--h", solve_h, "h1|h2|const:VALUE");
  solve->add_option("--family", solve_family, "bernoulli|gaussian");
  solve->add_option("--sigma", solve_sigma, "Gaussian sigma");
  solve->add_option("--r-mesh", solve_mesh, "First-batch allocation mesh");
  solve->add_option("--out", solve_out, "Solution JSON path");

  // dot-sim
  auto* dot = app.add_subcommand("dot-sim", "Delayed-tracking batch runs");
  std::string dot_instance, dot_solution, dot_out;
  std::int64_t dot_t = 2000, dot_trials = 1000;
  std::uint64_t dot_seed = 1;
  dot->add_option("--instance", dot_instance, "Instance JSON")->required();
  dot->add_option("--solution", dot_solution, "Solution JSON")->required();
  dot->add_option("--T", dot_t, "Budget");
  dot->add_option("--trials", dot_trials, "Trial count");
  dot->add_option("--seed", dot_seed, "Master seed");
  dot->add_option("--out", dot_out, "Summary CSV path");

  // fc-alloc
  auto* fc = app.add_subcommand("fc-alloc", "Fixed-confidence optimal allocation");
  std::string fc_instance, fc_out;
  double fc_tol = 1e-11;
  fc->add_option("--instance", fc_instance, "Instance JSON")->required();
  fc->add_option("--tol", fc_tol, "Search tolerance");
  fc->add_option("--out", fc_out, "Allocation JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(sim_instance, sim_policy, sim_t, sim_trials, sim_seed,
                          sim_checkpoints, sim_out, sim_threads, sim_disc, sim_oracle);
    if (enu->parsed()) return cmd_enumerate(enu_instance, enu_policy, enu_t);
    if (rate->parsed())
      return cmd_rate(rate_model, rate_instance, rate_grid, rate_lo, rate_hi);
    if (train_cmd->parsed())
      return cmd_train(train_config, train_out, train_progress, train_seed);
    if (solve->parsed())
      return cmd_rgo_solve(solve_k, solve_qgrid, solve_pgrid, solve_method,
                           solve_batches, solve_h, solve_family, solve_sigma,
                           solve_mesh, solve_out);
    if (dot->parsed())
      return cmd_dot_sim(dot_instance, dot_solution, dot_t, dot_trials, dot_seed, dot_out);
    if (fc->parsed()) return cmd_fc_alloc(fc_instance, fc_tol, fc_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
