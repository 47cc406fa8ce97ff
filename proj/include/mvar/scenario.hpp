#pragma once

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mvar/verification.hpp"

namespace mvar {

/// Everything a run needs: model, preference, risk spec inputs, Monte Carlo
/// settings, evaluation grid, mode and output destination. Defaults are the
/// first benchmark scenario.
struct ScenarioConfig {
  MarketParams market{0.05, 0.3, 0.01, 0.14, 0.2};
  Preference pref{1.0, 10.0, 1.0};
  double p = 0.01;
  double tau = 1.0 / 260.0;
  double var_cap = 0.02;
  SimConfig sim{100000, 1.0 / 260.0, 1, 8192};
  GridSpec grid{0.0, 10.0, 0.0, 1.0, 101, 101};
  ValueMode mode = ValueMode::Paper;
  std::string format = "csv";
  std::string out;

  bool operator==(const ScenarioConfig&) const = default;
  RiskSpec risk() const { return make_risk_spec(p, tau, var_cap, market); }
};

/// Compiled-in presets for the two benchmark parameter tables.
ScenarioConfig preset_table1();
ScenarioConfig preset_table2();
std::optional<ScenarioConfig> preset_by_name(const std::string& name);

/// Flat key = value text (sections and # comments tolerated) or a JSON object
/// with the same keys. Unknown keys are rejected; the result is validated.
ScenarioConfig load_config_text(const std::string& text);
ScenarioConfig load_config_file(const std::string& path);
std::string serialize_config(const ScenarioConfig& config);
void validate_config(const ScenarioConfig& config);

/// Dense policy/value layers over the (t, x) grid; rows index t, columns x.
struct SurfaceGrid {
  Eigen::ArrayXd t_values;
  Eigen::ArrayXd x_values;
  Eigen::ArrayXXd f_star;
  Eigen::ArrayXXd f_var;
  Eigen::ArrayXXd v_unconstrained;
  Eigen::ArrayXXd v_constrained;
  Eigen::ArrayXXi branch;  // branch_code values
  Eigen::ArrayXXi active;  // 0/1 constraint-active mask
};

struct ScenarioSummary {
  CaseDiagnostics diagnostics;
  FeasibleSet feasible;
  ValueMode mode = ValueMode::Paper;
  bool surface_computed = false;
  double active_fraction = 0.0;
  // Bounding box of the constraint-inactive region, when a surface exists
  // and the region is nonempty.
  std::optional<GridSpec> inactive_window;
};

struct ScenarioResult {
  ScenarioSummary summary;
  std::optional<SurfaceGrid> surface;
};

/// Evaluates all layers on the grid. An empty feasible set yields a summary
/// without surfaces rather than an error.
ScenarioResult run_scenario(const ScenarioConfig& config);

void export_surface_csv(const SurfaceGrid& grid, std::ostream& os);
void export_surface_json(const SurfaceGrid& grid, std::ostream& os);
/// format is "csv" or "json"; writes bytes that are identical across runs
/// for an identical config.
void export_surface(const SurfaceGrid& grid, const std::string& format,
                    const std::string& path);

enum class VerifySuite { Fast, Full };
enum class CheckStatus { Pass, Fail, Skip, Info };

const char* to_string(CheckStatus status);

struct CheckResult {
  std::string name;
  CheckStatus status;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool hard_failure() const;
};

/// Invariant suites over the configured scenario. Fast keeps Monte Carlo at
/// or below 1e4 paths; Full uses the configured path count and adds the
/// policy comparisons and the mode-discrimination report.
VerificationReport run_verification(const ScenarioConfig& config, VerifySuite suite);

// JSON views of the report types (shared by the CLI and the verify output).
nlohmann::json policy_eval_json(const PolicyEval& eval);
nlohmann::json summary_json(const ScenarioSummary& summary);
nlohmann::json batch_json(const PathBatch& batch, const SimConfig& cfg);
nlohmann::json mode_report_json(const ModeReport& report);
nlohmann::json verification_json(const VerificationReport& report);

}  // namespace mvar
