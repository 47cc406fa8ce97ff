#pragma once

#include <optional>

#include "mvar/unconstrained.hpp"
#include "mvar/var_risk.hpp"

namespace mvar {

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError() : std::runtime_error("VaR constraint admits no strategy (empty set)") {}
};

enum class Branch { Interior, ClampLower, ClampUpper, Case1Clamp };

const char* to_string(Branch branch);
int branch_code(Branch branch);  // stable small integers for exports

/// Drift and half-variance of the wealth process frozen at a clamp point f:
///   D = f mu + alpha,  E = (f^2 sigma^2 + beta^2 + 2 rho sigma beta f) / 2.
struct ClampEntry {
  double f;
  double D;
  double E;
};

/// Entries for the finite endpoints of the feasible set. `lower` exists for
/// every nonempty case; `upper` only for the closed interval.
struct ClampConstants {
  std::optional<ClampEntry> lower;
  std::optional<ClampEntry> upper;
};

ClampConstants clamp_constants(const MarketParams& params, const RiskSpec& spec,
                               const FeasibleSet& feasible);

/// Value of holding a constant strategy with constants (D, E) from (t, x) to T:
///   1/(4 gamma) - gamma [y^2 + 2 D y s + D^2 s^2 + 2 E s],  y = x - 1/(2 gamma), s = T - t.
/// Identical to the Gaussian-moment utility m - gamma (m^2 + v) with
/// m = x + D s, v = 2 E s.
double constant_clamp_value(double gamma, double t, double x, double T, const ClampEntry& e);

struct PolicyEval {
  double t = 0.0;
  double x = 0.0;
  double f_star = 0.0;  // unconstrained optimizer
  double f_var = 0.0;   // clamped optimizer, always inside the feasible set
  Branch branch = Branch::Interior;
  double V_unconstrained = 0.0;
  double V_constrained = 0.0;
  bool constraint_active = false;  // branch != Interior
  ValueMode mode = ValueMode::Paper;
};

/// Clamp of the unconstrained optimizer onto the feasible set, with both
/// value functions. Ties at an endpoint classify as Interior (the values
/// agree there by continuity). Throws InfeasibleError on an empty set.
PolicyEval optimal_f_constrained(const MarketParams& params, const Preference& pref,
                                 const RiskSpec& spec, double t, double x,
                                 ValueMode mode = ValueMode::Paper);

/// Piecewise value function of the constrained problem at (t, x).
double value_constrained(const MarketParams& params, const Preference& pref,
                         const RiskSpec& spec, double t, double x,
                         ValueMode mode = ValueMode::Paper);

/// Callable (t, x) -> f_var with the feasible set resolved once up front;
/// cheap enough to drive a path simulation step by step.
PolicyFn constrained_policy(const MarketParams& params, const Preference& pref,
                            const RiskSpec& spec, ValueMode mode = ValueMode::Paper);

}  // namespace mvar
