#include "mvar/unconstrained.hpp"

#include <cmath>

namespace mvar {

namespace {

// exp-moment integrals I_n(s) = \int_0^s u^n e^{a u} du for n = 0, 1, 2.
// Closed forms cancel badly when |a s| is small, so a short series takes over.
struct ExpMoments {
  double i0;
  double i1;
  double i2;
};

ExpMoments exp_moments(double a, double s) {
  const double as = a * s;
  if (std::abs(as) <= 0.5) {
    double i0 = 0.0, i1 = 0.0, i2 = 0.0;
    double term = 1.0;  // (a s)^n / n!
    for (int n = 0; n <= 14; ++n) {
      i0 += term / (n + 1);
      i1 += term / (n + 2);
      i2 += term / (n + 3);
      term *= as / (n + 1);
    }
    return {s * i0, s * s * i1, s * s * s * i2};
  }
  const double e = std::exp(as);
  const double i0 = (e - 1.0) / a;
  const double i1 = (e * (as - 1.0) + 1.0) / (a * a);
  const double i2 = (e * (as * as - 2.0 * as + 2.0) - 2.0) / (a * a * a);
  return {i0, i1, i2};
}

}  // namespace

const char* to_string(ValueMode mode) {
  return mode == ValueMode::Paper ? "paper" : "rederived";
}

HJBConstants hjb_constants(const MarketParams& p) {
  const double ratio = p.mu / p.sigma;
  return {p.alpha - p.rho * p.beta * ratio, -0.5 * ratio * ratio,
          0.5 * p.beta * p.beta * (1.0 - p.rho * p.rho)};
}

PaperCoefficients paper_coefficients(const HJBConstants& c, double gamma, double s) {
  const double e = std::exp(2.0 * c.B * s);
  const double den = 2.0 * c.B * s - 1.0;  // <= -1 for s >= 0
  const double g2 = s / den;
  PaperCoefficients k;
  k.k1 = 2.0 * c.B;
  k.k2 = 2.0 * c.A * gamma * e / den;
  // The C term is kept outside the bracket so A = 0 stays well defined.
  k.k3 = 2.0 * c.A * c.A * gamma * e * (g2 - c.B * g2 * g2) - 2.0 * c.C * gamma * e;
  return k;
}

OdeCoefficients ode_coefficients(const HJBConstants& c, double gamma, double s) {
  const double e = std::exp(2.0 * c.B * s);
  const auto m = exp_moments(2.0 * c.B, s);
  OdeCoefficients o;
  o.P = e;
  o.Q = -2.0 * c.A * gamma * s * e;
  o.R = -2.0 * gamma * (c.A * c.A * m.i1 + c.A * c.A * c.B * m.i2 + c.C * m.i0);
  return o;
}

double optimal_f_unconstrained(const MarketParams& p, const Preference& pref, double t,
                               double x, ValueMode mode) {
  if (t > pref.T) throw std::domain_error("optimal_f_unconstrained: t must not exceed T");
  const HJBConstants c = hjb_constants(p);
  const double s = pref.T - t;
  const double y = x - 1.0 / (2.0 * pref.gamma);
  const double base = -(p.mu / (p.sigma * p.sigma)) * y - p.rho * p.beta / p.sigma;
  if (mode == ValueMode::Paper)
    return base - p.mu * c.A * s / (p.mu * p.mu * s + p.sigma * p.sigma);
  return base - (p.mu / (p.sigma * p.sigma)) * c.A * s;
}

double value_unconstrained(const MarketParams& p, const Preference& pref, double t, double x,
                           ValueMode mode) {
  return value_partials_unconstrained(p, pref, t, x, mode).V;
}

// Defined for all t: the closed forms are analytic in s = T - t, which lets
// finite-difference stencils probe slightly past the terminal time.
ValuePartials value_partials_unconstrained(const MarketParams& p, const Preference& pref,
                                           double t, double x, ValueMode mode) {
  const HJBConstants c = hjb_constants(p);
  const double gamma = pref.gamma;
  const double s = pref.T - t;
  const double y = x - 1.0 / (2.0 * gamma);

  ValuePartials out;
  if (mode == ValueMode::Rederived) {
    const auto o = ode_coefficients(c, gamma, s);
    out.V = -gamma * o.P * y * y + o.Q * y + o.R + 1.0 / (4.0 * gamma);
    out.V_x = -2.0 * gamma * o.P * y + o.Q;
    out.V_xx = -2.0 * gamma * o.P;
    // d/dt of the closed forms P = e^{2Bs}, Q = -2 A gamma s e^{2Bs},
    // R = -2 gamma int_0^s e^{2Bu} (A^2 u + A^2 B u^2 + C) du.
    const double e = o.P;
    const double p_t = -2.0 * c.B * e;
    const double q_t = 2.0 * c.A * gamma * (1.0 + 2.0 * c.B * s) * e;
    const double r_t = 2.0 * gamma * e * (c.A * c.A * s + c.A * c.A * c.B * s * s + c.C);
    out.V_t = -gamma * p_t * y * y + q_t * y + r_t;
    return out;
  }

  // Paper mode: V = -gamma y^2 g1 + kappa2 y + kappa3 + 1/(4 gamma) with
  // g1 = e^{2Bs}, kappa2 = k2 s, kappa3 = k3 s, all functions of s.
  const double g1 = std::exp(2.0 * c.B * s);
  const double den = 2.0 * c.B * s - 1.0;
  const double g2 = s / den;
  const double kappa2 = 2.0 * c.A * gamma * g1 * g2;
  const double u = s * g2;       // s^2 / (2Bs - 1)
  const double w = s * g2 * g2;  // s^3 / (2Bs - 1)^2
  const double kappa3 = 2.0 * c.A * c.A * gamma * g1 * (u - c.B * w) - 2.0 * c.C * gamma * s * g1;

  out.V = -gamma * y * y * g1 + kappa2 * y + kappa3 + 1.0 / (4.0 * gamma);
  out.V_x = -2.0 * gamma * g1 * y + kappa2;
  out.V_xx = -2.0 * gamma * g1;

  const double g1p = 2.0 * c.B * g1;            // d g1 / ds
  const double g2p = -1.0 / (den * den);        // d g2 / ds
  const double up = 2.0 * s * (c.B * s - 1.0) / (den * den);
  const double wp = s * s * (2.0 * c.B * s - 3.0) / (den * den * den);
  const double kappa2p = 2.0 * c.A * gamma * (g1p * g2 + g1 * g2p);
  const double kappa3p = 2.0 * c.A * c.A * gamma * (g1p * (u - c.B * w) + g1 * (up - c.B * wp)) -
                         2.0 * c.C * gamma * (g1 + s * g1p);
  // V_t = -dV/ds
  out.V_t = gamma * y * y * g1p - kappa2p * y - kappa3p;
  return out;
}

}  // namespace mvar
