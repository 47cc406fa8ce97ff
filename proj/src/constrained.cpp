#include "mvar/constrained.hpp"

#include <cmath>

namespace mvar {

namespace {

ClampEntry make_entry(const MarketParams& p, double f) {
  return {f, f * p.mu + p.alpha, 0.5 * wealth_variance_rate(p, f)};
}

}  // namespace

const char* to_string(Branch branch) {
  switch (branch) {
    case Branch::Interior:
      return "Interior";
    case Branch::ClampLower:
      return "ClampLower";
    case Branch::ClampUpper:
      return "ClampUpper";
    case Branch::Case1Clamp:
      return "Case1Clamp";
  }
  return "?";
}

int branch_code(Branch branch) {
  switch (branch) {
    case Branch::Interior:
      return 0;
    case Branch::ClampLower:
      return 1;
    case Branch::ClampUpper:
      return 2;
    case Branch::Case1Clamp:
      return 3;
  }
  return -1;
}

ClampConstants clamp_constants(const MarketParams& params, const RiskSpec&,
                               const FeasibleSet& feasible) {
  ClampConstants out;
  switch (feasible.case_tag) {
    case CaseTag::Empty:
      throw InfeasibleError();
    case CaseTag::ClosedInterval:
      out.lower = make_entry(params, feasible.lower);
      out.upper = make_entry(params, feasible.upper);
      break;
    case CaseTag::HalfLine:
    case CaseTag::DegenerateHalfLine:
      out.lower = make_entry(params, feasible.lower);
      break;
  }
  return out;
}

double constant_clamp_value(double gamma, double t, double x, double T, const ClampEntry& e) {
  const double s = T - t;
  const double y = x - 1.0 / (2.0 * gamma);
  return 1.0 / (4.0 * gamma) -
         gamma * (y * y + 2.0 * e.D * y * s + e.D * e.D * s * s + 2.0 * e.E * s);
}

PolicyEval optimal_f_constrained(const MarketParams& params, const Preference& pref,
                                 const RiskSpec& spec, double t, double x, ValueMode mode) {
  const FeasibleSet feasible = feasible_set(params, spec);
  if (feasible.case_tag == CaseTag::Empty) throw InfeasibleError();
  const ClampConstants clamp = clamp_constants(params, spec, feasible);

  PolicyEval eval;
  eval.t = t;
  eval.x = x;
  eval.mode = mode;
  eval.f_star = optimal_f_unconstrained(params, pref, t, x, mode);
  eval.V_unconstrained = value_unconstrained(params, pref, t, x, mode);

  eval.branch = Branch::Interior;
  eval.f_var = eval.f_star;
  if (eval.f_star < feasible.lower) {
    eval.branch = feasible.case_tag == CaseTag::DegenerateHalfLine ? Branch::Case1Clamp
                                                                   : Branch::ClampLower;
    eval.f_var = feasible.lower;
  } else if (feasible.case_tag == CaseTag::ClosedInterval && eval.f_star > feasible.upper) {
    eval.branch = Branch::ClampUpper;
    eval.f_var = feasible.upper;
  }
  eval.constraint_active = eval.branch != Branch::Interior;

  switch (eval.branch) {
    case Branch::Interior:
      eval.V_constrained = eval.V_unconstrained;
      break;
    case Branch::ClampLower:
    case Branch::Case1Clamp:
      eval.V_constrained = constant_clamp_value(pref.gamma, t, x, pref.T, *clamp.lower);
      break;
    case Branch::ClampUpper:
      eval.V_constrained = constant_clamp_value(pref.gamma, t, x, pref.T, *clamp.upper);
      break;
  }
  return eval;
}

double value_constrained(const MarketParams& params, const Preference& pref,
                         const RiskSpec& spec, double t, double x, ValueMode mode) {
  return optimal_f_constrained(params, pref, spec, t, x, mode).V_constrained;
}

PolicyFn constrained_policy(const MarketParams& params, const Preference& pref,
                            const RiskSpec& spec, ValueMode mode) {
  const FeasibleSet feasible = feasible_set(params, spec);
  if (feasible.case_tag == CaseTag::Empty) throw InfeasibleError();
  const double lo = feasible.lower;
  const double hi = feasible.upper;  // +inf for half-lines
  return [params, pref, lo, hi, mode](double t, double x) {
    const double f = optimal_f_unconstrained(params, pref, t, x, mode);
    return std::min(hi, std::max(lo, f));
  };
}

}  // namespace mvar
