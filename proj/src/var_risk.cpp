#include "mvar/var_risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvar/normal.hpp"

namespace mvar {

namespace {

// Relative tolerance for treating N^2 sigma^2 - mu^2 as zero.
constexpr double kDegenerateTol = 1e-12;
// Relative tolerance for snapping a barely negative discriminant to a double root.
constexpr double kTangencyTol = 1e-10;

// Roots of a f^2 + b f + c = 0 via the cancellation-free split, with the
// discriminant supplied by the caller. Returned ordered, first <= second.
std::pair<double, double> ordered_roots(double a, double b, double c, double delta) {
  const double sq = std::sqrt(std::max(0.0, delta));
  const double q = -0.5 * (b + std::copysign(sq, b));
  double r1, r2;
  if (q == 0.0) {  // b == 0 and delta == 0
    r1 = r2 = 0.0;
  } else {
    r1 = q / a;
    r2 = c / q;
  }
  return {std::min(r1, r2), std::max(r1, r2)};
}

}  // namespace

const char* to_string(CaseTag tag) {
  switch (tag) {
    case CaseTag::DegenerateHalfLine:
      return "DegenerateHalfLine";
    case CaseTag::HalfLine:
      return "HalfLine";
    case CaseTag::ClosedInterval:
      return "ClosedInterval";
    case CaseTag::Empty:
      return "Empty";
  }
  return "?";
}

RiskSpec make_risk_spec(double p, double tau, double var_cap, const MarketParams& params) {
  if (!(p > 0.0 && p < 0.5))
    throw std::domain_error("risk spec requires p in (0, 0.5)");
  if (!(tau > 0.0)) throw std::domain_error("risk spec requires tau > 0");
  if (!(var_cap >= 0.0)) throw std::domain_error("risk spec requires var_cap >= 0");
  RiskSpec spec;
  spec.p = p;
  spec.tau = tau;
  spec.var_cap = var_cap;
  // Phi^{-1}(1 - p) = -Phi^{-1}(p); the negated form keeps full precision for small p.
  spec.N = -norm_quantile(p) / std::sqrt(tau);
  spec.M = params.alpha + var_cap / tau;
  if (!(spec.N > 0.0)) throw std::domain_error("risk spec requires N > 0");
  if (!(spec.M > 0.0))
    throw std::domain_error("risk spec requires M = alpha + var_cap/tau > 0");
  return spec;
}

double quantile_of_gain(const MarketParams& params, const RiskSpec& spec, double f) {
  return spec.tau * (f * params.mu + params.alpha) +
         std::sqrt(spec.tau) * std::sqrt(wealth_variance_rate(params, f)) *
             norm_quantile(spec.p);
}

double var_of_strategy(const MarketParams& params, const RiskSpec& spec, double f) {
  return std::max(0.0, -quantile_of_gain(params, spec, f));
}

CaseDiagnostics classify_case(const MarketParams& params, const RiskSpec& spec) {
  const double mu = params.mu, sigma = params.sigma, beta = params.beta, rho = params.rho;
  const double N = spec.N, M = spec.M;

  CaseDiagnostics d;
  d.N = N;
  d.M = M;
  d.quad_a = N * N * sigma * sigma - mu * mu;
  d.quad_b = 2.0 * (rho * sigma * beta * N * N - mu * M);
  d.quad_c = N * N * beta * beta - M * M;
  const double one_m_rho2 = 1.0 - rho * rho;
  const double edge = sigma * M - rho * beta * mu;
  d.delta = 4.0 * N * N * (one_m_rho2 * beta * beta * (mu * mu - N * N * sigma * sigma) +
                           edge * edge);
  d.tangency_bound = edge * edge / (one_m_rho2 * beta * beta);
  d.rho_beta_n_minus_m = rho * beta * N - M;
  d.degenerate = std::abs(d.quad_a) <=
                 kDegenerateTol * std::max(N * N * sigma * sigma, mu * mu);
  d.slope_below = !d.degenerate && d.quad_a < 0.0;
  d.axis_right_of_floor = rho * beta * mu < sigma * M;

  // Snap a barely negative discriminant to a tangency (double root).
  double delta_eff = d.delta;
  const double eps_delta =
      kTangencyTol * 4.0 * N * N *
      std::max(std::abs(one_m_rho2 * beta * beta * (mu * mu - N * N * sigma * sigma)),
               edge * edge);
  if (delta_eff < 0.0 && delta_eff >= -eps_delta) delta_eff = 0.0;
  d.delta_nonneg = delta_eff >= 0.0;

  if (!d.degenerate && d.delta_nonneg)
    d.roots = ordered_roots(d.quad_a, d.quad_b, d.quad_c, delta_eff);

  if (d.degenerate) {
    // The quadratic degenerates to a line; only rho beta N < M leaves a half-line.
    d.tag = d.rho_beta_n_minus_m < 0.0 ? CaseTag::DegenerateHalfLine : CaseTag::Empty;
  } else if (d.slope_below) {
    d.tag = CaseTag::HalfLine;  // delta > 0 automatically in this branch
  } else if (d.delta_nonneg && d.axis_right_of_floor) {
    d.tag = CaseTag::ClosedInterval;
  } else {
    d.tag = CaseTag::Empty;
  }
  return d;
}

FeasibleSet feasible_set(const MarketParams& params, const RiskSpec& spec) {
  const CaseDiagnostics d = classify_case(params, spec);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  FeasibleSet set;
  set.case_tag = d.tag;
  switch (d.tag) {
    case CaseTag::DegenerateHalfLine:
      set.lower = (d.M * d.M - d.N * d.N * params.beta * params.beta) /
                  (2.0 * params.mu * d.rho_beta_n_minus_m);
      set.upper = kInf;
      break;
    case CaseTag::HalfLine:
      if (!d.roots || !std::isfinite(d.roots->first) || !std::isfinite(d.roots->second))
        throw std::logic_error("feasible_set: half-line classification without real roots");
      set.roots = d.roots;
      set.lower = d.roots->second;  // f1, the larger root
      set.upper = kInf;
      break;
    case CaseTag::ClosedInterval:
      if (!d.roots || !std::isfinite(d.roots->first) || !std::isfinite(d.roots->second))
        throw std::logic_error("feasible_set: interval classification without real roots");
      set.roots = d.roots;
      set.lower = d.roots->first;
      set.upper = d.roots->second;
      break;
    case CaseTag::Empty:
      set.lower = 0.0;
      set.upper = 0.0;
      break;
  }
  return set;
}

}  // namespace mvar
