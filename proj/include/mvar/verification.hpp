#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>

#include "mvar/constrained.hpp"

namespace mvar {

struct GridSpec {
  double t_min = 0.0;
  double t_max = 10.0;
  double x_min = 0.0;
  double x_max = 1.0;
  int nt = 101;
  int nx = 101;

  bool operator==(const GridSpec&) const = default;
  Eigen::ArrayXd t_values() const { return Eigen::ArrayXd::LinSpaced(nt, t_min, t_max); }
  Eigen::ArrayXd x_values() const { return Eigen::ArrayXd::LinSpaced(nx, x_min, x_max); }
};

/// A value surface that can be probed pointwise; `partials` may be empty, in
/// which case residuals fall back to Richardson-extrapolated central
/// differences of `value`.
struct ValueSurfaceFn {
  std::function<double(double t, double x)> value;
  std::function<ValuePartials(double t, double x)> partials;  // optional
  const char* label = "";
};

ValueSurfaceFn value_surface(const MarketParams& params, const Preference& pref,
                             ValueMode mode, bool analytic_partials = true);

/// Pointwise residual of V_t + A V_x + B V_x^2/V_xx + C V_xx on a grid.
struct ResidualReport {
  GridSpec grid;
  std::string label;
  Eigen::ArrayXXd residual;  // nt x nx
  double max_abs = 0.0;
  double mean_abs = 0.0;
};

/// Throws std::domain_error if |V_xx| <= 1e-10 anywhere on the grid.
ResidualReport hjb_residual(const ValueSurfaceFn& fn, const MarketParams& params,
                            const GridSpec& grid);

/// Dense-grid maximization of g(f) = sigma^2 V_xx f^2 / 2 + (mu V_x + rho sigma beta V_xx) f
/// over the feasible set. Half-lines are truncated at the parabola vertex
/// plus 10 units beyond the finite endpoint.
struct QuadraticArgmax {
  double f;
  double g;
  double grid_step;
};

QuadraticArgmax static_quadratic_oracle(double v_x, double v_xx, const MarketParams& params,
                                        const FeasibleSet& feasible, std::int64_t n_points);

/// Monte Carlo utility of a policy from (0, x0) compared against a supplied
/// closed-form value at a +-(n_se x standard error) band.
struct OracleComparison {
  double t = 0.0;
  double x = 0.0;
  double solver_value = 0.0;
  double oracle_value = 0.0;  // MC estimate
  double std_error = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  bool pass = false;
};

OracleComparison mc_utility(const MarketParams& params, const Preference& pref,
                            const PolicyFn& policy, const SimConfig& cfg,
                            double reference_value, double n_se = 4.0);

/// Side-by-side comparison of the two value-function conventions: residual
/// magnitudes, strategies and values at (0, x0), and whether each mode's
/// closed form matches the Monte Carlo utility of its own policy.
struct ModeReport {
  double t = 0.0;
  double x = 0.0;
  double f_star_paper = 0.0;
  double f_star_rederived = 0.0;
  double value_paper = 0.0;
  double value_rederived = 0.0;
  double residual_max_paper = 0.0;
  double residual_mean_paper = 0.0;
  double residual_max_rederived = 0.0;
  double residual_mean_rederived = 0.0;
  OracleComparison mc_paper;
  OracleComparison mc_rederived;
};

ModeReport mode_discrimination_report(const MarketParams& params, const Preference& pref,
                                      const SimConfig& cfg, const GridSpec& grid);

}  // namespace mvar
