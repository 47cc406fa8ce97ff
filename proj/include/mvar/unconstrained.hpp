#pragma once

#include "mvar/market.hpp"

namespace mvar {

/// Constants of the reduced Cauchy problem
///   V_t + A V_x + B V_x^2 / V_xx + C V_xx = 0,  V(T, x) = x - gamma x^2.
struct HJBConstants {
  double A;  // alpha - rho beta mu / sigma
  double B;  // -(mu/sigma)^2 / 2, always negative
  double C;  // beta^2 (1 - rho^2) / 2, always positive
};

HJBConstants hjb_constants(const MarketParams& params);

/// Two coefficient conventions for the quadratic-ansatz value function.
/// Paper is the classical closed form whose linear and constant coefficients
/// are treated as constants under the time derivative; Rederived integrates
/// the coefficient ODE system consistently. They share the terminal slice and
/// differ for t < T; the PDE residual report discriminates them numerically.
enum class ValueMode { Paper, Rederived };

const char* to_string(ValueMode mode);

/// Printed closed-form coefficients at remaining horizon s = T - t:
///   V = -gamma y^2 e^{k1 s} + k2 s y + k3 s + 1/(4 gamma),  y = x - 1/(2 gamma).
struct PaperCoefficients {
  double k1;  // = 2B exactly
  double k2;
  double k3;
};

PaperCoefficients paper_coefficients(const HJBConstants& c, double gamma, double s);

/// ODE-system coefficients at remaining horizon s = T - t:
///   V = -gamma P y^2 + Q y + R + 1/(4 gamma)
/// with P' = -2BP, Q' = 2 A gamma P - 2BQ, R' = -AQ + BQ^2/(2 gamma P) + 2 C gamma P
/// (derivatives in t) and P(T) = 1, Q(T) = 0, R(T) = 0.
struct OdeCoefficients {
  double P;
  double Q;
  double R;
};

OdeCoefficients ode_coefficients(const HJBConstants& c, double gamma, double s);

/// Optimal unconstrained strategy at (t, x).
double optimal_f_unconstrained(const MarketParams& params, const Preference& pref, double t,
                               double x, ValueMode mode = ValueMode::Paper);

/// Value function at (t, x) in the requested mode.
double value_unconstrained(const MarketParams& params, const Preference& pref, double t,
                           double x, ValueMode mode);

struct ValuePartials {
  double V;
  double V_t;
  double V_x;
  double V_xx;
};

/// Value plus analytic partial derivatives of the chosen mode's closed form.
/// V_t differentiates the full s-dependence of the coefficients, so plugging
/// these into the Cauchy problem measures the genuine PDE residual of the
/// closed form.
ValuePartials value_partials_unconstrained(const MarketParams& params, const Preference& pref,
                                           double t, double x, ValueMode mode);

}  // namespace mvar
