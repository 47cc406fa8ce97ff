#include "mvar/verification.hpp"

#include <cmath>

namespace mvar {

namespace {

// Richardson-extrapolated central differences: combining steps h and h/2
// cancels the leading O(h^2) term.
double diff1(const std::function<double(double)>& f, double v, double h) {
  const double d_h = (f(v + h) - f(v - h)) / (2.0 * h);
  const double d_h2 = (f(v + 0.5 * h) - f(v - 0.5 * h)) / h;
  return (4.0 * d_h2 - d_h) / 3.0;
}

double diff2(const std::function<double(double)>& f, double v, double h) {
  const double f0 = f(v);
  const double d_h = (f(v + h) - 2.0 * f0 + f(v - h)) / (h * h);
  const double d_h2 = (f(v + 0.5 * h) - 2.0 * f0 + f(v - 0.5 * h)) / (0.25 * h * h);
  return (4.0 * d_h2 - d_h) / 3.0;
}

}  // namespace

ValueSurfaceFn value_surface(const MarketParams& params, const Preference& pref,
                             ValueMode mode, bool analytic_partials) {
  ValueSurfaceFn fn;
  fn.label = to_string(mode);
  fn.value = [params, pref, mode](double t, double x) {
    return value_unconstrained(params, pref, t, x, mode);
  };
  if (analytic_partials)
    fn.partials = [params, pref, mode](double t, double x) {
      return value_partials_unconstrained(params, pref, t, x, mode);
    };
  return fn;
}

ResidualReport hjb_residual(const ValueSurfaceFn& fn, const MarketParams& params,
                            const GridSpec& grid) {
  const HJBConstants c = hjb_constants(params);
  ResidualReport report;
  report.grid = grid;
  report.label = fn.label;
  report.residual.resize(grid.nt, grid.nx);

  const Eigen::ArrayXd ts = grid.t_values();
  const Eigen::ArrayXd xs = grid.x_values();
  double sum = 0.0;
  for (int i = 0; i < grid.nt; ++i) {
    const double t = ts[i];
    for (int j = 0; j < grid.nx; ++j) {
      const double x = xs[j];
      ValuePartials pd;
      if (fn.partials) {
        pd = fn.partials(t, x);
      } else {
        const double ht = 1e-5 * std::max(1.0, grid.t_max);
        const double hx = 1e-5 * std::max(1.0, std::abs(x));
        pd.V = fn.value(t, x);
        pd.V_t = diff1([&](double u) { return fn.value(u, x); }, t, ht);
        pd.V_x = diff1([&](double u) { return fn.value(t, u); }, x, hx);
        pd.V_xx = diff2([&](double u) { return fn.value(t, u); }, x, hx);
      }
      if (!(std::abs(pd.V_xx) > 1e-10))
        throw std::domain_error("hjb_residual: degenerate curvature |V_xx| <= 1e-10 at grid point");
      const double r = pd.V_t + c.A * pd.V_x + c.B * pd.V_x * pd.V_x / pd.V_xx + c.C * pd.V_xx;
      report.residual(i, j) = r;
      const double a = std::abs(r);
      sum += a;
      if (a > report.max_abs) report.max_abs = a;
    }
  }
  report.mean_abs = sum / static_cast<double>(grid.nt) / static_cast<double>(grid.nx);
  return report;
}

QuadraticArgmax static_quadratic_oracle(double v_x, double v_xx, const MarketParams& params,
                                        const FeasibleSet& feasible, std::int64_t n_points) {
  if (!(v_xx < 0.0))
    throw std::domain_error("static_quadratic_oracle: requires V_xx < 0");
  if (feasible.case_tag == CaseTag::Empty) throw InfeasibleError();
  if (n_points < 2) throw std::domain_error("static_quadratic_oracle: n_points must be >= 2");

  const double qa = 0.5 * v_xx * params.sigma * params.sigma;
  const double qb = params.mu * v_x + params.rho * params.sigma * params.beta * v_xx;
  const auto g = [qa, qb](double f) { return qa * f * f + qb * f; };

  double lo = feasible.lower;
  double hi = feasible.upper;
  if (!std::isfinite(hi)) {
    const double vertex = -qb / (2.0 * qa);
    hi = std::max(lo, vertex) + 10.0;
  }

  const double step = (hi - lo) / static_cast<double>(n_points - 1);
  double best_f = lo;
  double best_g = g(lo);
  for (std::int64_t k = 1; k < n_points; ++k) {
    const double f = k + 1 == n_points ? hi : lo + step * static_cast<double>(k);
    const double val = g(f);
    if (val > best_g) {
      best_g = val;
      best_f = f;
    }
  }
  return {best_f, best_g, step};
}

OracleComparison mc_utility(const MarketParams& params, const Preference& pref,
                            const PolicyFn& policy, const SimConfig& cfg,
                            double reference_value, double n_se) {
  const PathBatch batch = simulate_paths(params, pref, policy, cfg);
  OracleComparison cmp;
  cmp.t = 0.0;
  cmp.x = pref.x0;
  cmp.solver_value = reference_value;
  cmp.oracle_value = batch.mean_utility;
  cmp.std_error = batch.std_error;
  cmp.abs_gap = std::abs(batch.mean_utility - reference_value);
  cmp.rel_gap = cmp.abs_gap / std::max(1.0, std::abs(reference_value));
  cmp.pass = cmp.abs_gap <= n_se * batch.std_error;
  return cmp;
}

ModeReport mode_discrimination_report(const MarketParams& params, const Preference& pref,
                                      const SimConfig& cfg, const GridSpec& grid) {
  ModeReport report;
  report.t = 0.0;
  report.x = pref.x0;
  report.f_star_paper = optimal_f_unconstrained(params, pref, 0.0, pref.x0, ValueMode::Paper);
  report.f_star_rederived =
      optimal_f_unconstrained(params, pref, 0.0, pref.x0, ValueMode::Rederived);
  report.value_paper = value_unconstrained(params, pref, 0.0, pref.x0, ValueMode::Paper);
  report.value_rederived =
      value_unconstrained(params, pref, 0.0, pref.x0, ValueMode::Rederived);

  const auto res_paper = hjb_residual(value_surface(params, pref, ValueMode::Paper), params, grid);
  const auto res_red =
      hjb_residual(value_surface(params, pref, ValueMode::Rederived), params, grid);
  report.residual_max_paper = res_paper.max_abs;
  report.residual_mean_paper = res_paper.mean_abs;
  report.residual_max_rederived = res_red.max_abs;
  report.residual_mean_rederived = res_red.mean_abs;

  const auto policy_of = [&](ValueMode mode) {
    return PolicyFn([params, pref, mode](double t, double x) {
      return optimal_f_unconstrained(params, pref, t, x, mode);
    });
  };
  SimConfig cfg_paper = cfg;
  SimConfig cfg_red = cfg;  // common random numbers sharpen the comparison
  report.mc_paper = mc_utility(params, pref, policy_of(ValueMode::Paper), cfg_paper,
                               report.value_paper);
  report.mc_rederived = mc_utility(params, pref, policy_of(ValueMode::Rederived), cfg_red,
                                   report.value_rederived);
  return report;
}

}  // namespace mvar
