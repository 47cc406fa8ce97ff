#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mvar/scenario.hpp"

namespace {

struct CommonOpts {
  std::string preset;
  std::string config_path;
  std::string mode;
  std::string format;
  std::string out;
  std::string grid;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> paths;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--preset", opts.preset, "Built-in scenario: table1 or table2");
  cmd->add_option("--config", opts.config_path, "Scenario config file (key=value or JSON)");
  cmd->add_option("--mode", opts.mode, "Value-function coefficients: paper or rederived");
  cmd->add_option("--format", opts.format, "Output format: csv or json");
  cmd->add_option("--out", opts.out, "Output path (default: stdout)");
  cmd->add_option("--seed", opts.seed, "Monte Carlo master seed");
  cmd->add_option("--paths", opts.paths, "Monte Carlo path count");
  cmd->add_option("--grid", opts.grid, "Evaluation grid as <nt>x<nx>, e.g. 101x101");
}

mvar::ScenarioConfig resolve_config(const CommonOpts& opts) {
  mvar::ScenarioConfig config;
  if (!opts.preset.empty() && !opts.config_path.empty())
    throw std::runtime_error("give either --preset or --config, not both");
  if (!opts.preset.empty()) {
    const auto preset = mvar::preset_by_name(opts.preset);
    if (!preset) throw std::runtime_error("unknown preset '" + opts.preset + "'");
    config = *preset;
  } else if (!opts.config_path.empty()) {
    config = mvar::load_config_file(opts.config_path);
  } else {
    config = mvar::preset_table1();
  }
  if (!opts.mode.empty()) {
    if (opts.mode == "paper") config.mode = mvar::ValueMode::Paper;
    else if (opts.mode == "rederived") config.mode = mvar::ValueMode::Rederived;
    else throw std::runtime_error("mode must be 'paper' or 'rederived'");
  }
  if (!opts.format.empty()) config.format = opts.format;
  if (!opts.out.empty()) config.out = opts.out;
  if (opts.seed) config.sim.master_seed = *opts.seed;
  if (opts.paths) config.sim.n_paths = *opts.paths;
  if (!opts.grid.empty()) {
    int nt = 0, nx = 0;
    if (std::sscanf(opts.grid.c_str(), "%dx%d", &nt, &nx) != 2)
      throw std::runtime_error("--grid expects <nt>x<nx>");
    config.grid.nt = nt;
    config.grid.nx = nx;
  }
  mvar::validate_config(config);
  return config;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file: " + out_path);
  os << text;
  if (!os) throw std::runtime_error("write failed: " + out_path);
}

int cmd_solve(const CommonOpts& opts, double t, std::optional<double> x) {
  const auto config = resolve_config(opts);
  const double at_x = x.value_or(config.pref.x0);
  const auto eval = mvar::optimal_f_constrained(config.market, config.pref, config.risk(), t,
                                                at_x, config.mode);
  emit(mvar::policy_eval_json(eval).dump(2) + "\n", config.out);
  return 0;
}

int cmd_surface(const CommonOpts& opts) {
  const auto config = resolve_config(opts);
  const auto result = mvar::run_scenario(config);
  if (!result.surface) {
    std::cerr << "infeasible: the VaR ceiling admits no strategy; summary follows\n";
    std::cout << mvar::summary_json(result.summary).dump(2) << "\n";
    return 0;
  }
  if (config.out.empty()) {
    if (config.format == "csv") mvar::export_surface_csv(*result.surface, std::cout);
    else mvar::export_surface_json(*result.surface, std::cout);
  } else {
    mvar::export_surface(*result.surface, config.format, config.out);
    std::cout << mvar::summary_json(result.summary).dump(2) << "\n";
  }
  return 0;
}

int cmd_simulate(const CommonOpts& opts, const std::string& policy) {
  const auto config = resolve_config(opts);
  mvar::PolicyFn rule;
  if (policy == "constrained") {
    rule = mvar::constrained_policy(config.market, config.pref, config.risk(), config.mode);
  } else if (policy == "unconstrained") {
    rule = [config](double t, double x) {
      return mvar::optimal_f_unconstrained(config.market, config.pref, t, x, config.mode);
    };
  } else if (policy.rfind("constant=", 0) == 0) {
    const double f = std::stod(policy.substr(9));
    rule = [f](double, double) { return f; };
  } else {
    throw std::runtime_error(
        "--policy must be constrained, unconstrained, or constant=<f>");
  }
  const auto batch = mvar::simulate_paths(config.market, config.pref, rule, config.sim);
  auto j = mvar::batch_json(batch, config.sim);
  j["policy"] = policy;
  emit(j.dump(2) + "\n", config.out);
  return 0;
}

int cmd_verify(const CommonOpts& opts, const std::string& suite) {
  const auto config = resolve_config(opts);
  const auto which = suite == "full" ? mvar::VerifySuite::Full : mvar::VerifySuite::Fast;
  if (suite != "full" && suite != "fast")
    throw std::runtime_error("--suite must be fast or full");
  const auto report = mvar::run_verification(config, which);
  for (const auto& check : report.checks)
    std::cout << "[" << to_string(check.status) << "] " << check.name << ": " << check.detail
              << "\n";
  if (!config.out.empty()) emit(mvar::verification_json(report).dump(2) + "\n", config.out);
  return report.hard_failure() ? 1 : 0;
}

int cmd_cases(const CommonOpts& opts) {
  const auto config = resolve_config(opts);
  const auto result = mvar::run_scenario(config);
  emit(mvar::summary_json(result.summary).dump(2) + "\n", config.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-variance investment strategies under a value-at-risk ceiling"};
  app.require_subcommand(1);

  CommonOpts opts;
  double solve_t = 0.0;
  std::optional<double> solve_x;
  std::string policy = "constrained";
  std::string suite = "fast";

  auto* solve = app.add_subcommand("solve", "Evaluate the policy at a single state (JSON)");
  add_common(solve, opts);
  solve->add_option("--t", solve_t, "Evaluation time (default 0)");
  solve->add_option("--x", solve_x, "Wealth level (default x0)");

  auto* surface = app.add_subcommand("surface", "Export strategy/value surfaces on the grid");
  add_common(surface, opts);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of a policy");
  add_common(simulate, opts);
  simulate->add_option("--policy", policy,
                       "constrained | unconstrained | constant=<f> (default constrained)");

  auto* verify = app.add_subcommand("verify", "Run the invariant suites");
  add_common(verify, opts);
  verify->add_option("--suite", suite, "fast | full (default fast)");

  auto* cases = app.add_subcommand("cases", "Classification diagnostics (JSON)");
  add_common(cases, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(opts, solve_t, solve_x);
    if (surface->parsed()) return cmd_surface(opts);
    if (simulate->parsed()) return cmd_simulate(opts, policy);
    if (verify->parsed()) return cmd_verify(opts, suite);
    if (cases->parsed()) return cmd_cases(opts);
  } catch (const mvar::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
