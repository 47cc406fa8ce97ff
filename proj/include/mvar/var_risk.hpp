#pragma once

#include <optional>
#include <utility>

#include "mvar/market.hpp"

namespace mvar {

/// One-period VaR specification. N and M are the derived constants that
/// drive the admissible-set classification:
///   N = Phi^{-1}(1 - p) / sqrt(tau),  M = alpha + var_cap / tau.
struct RiskSpec {
  double p;        // tail probability, in (0, 0.5)
  double tau;      // VaR horizon, years
  double var_cap;  // ceiling on the one-period VaR
  double N;
  double M;

  bool operator==(const RiskSpec&) const = default;
};

/// Validates and derives N, M. Throws std::domain_error on violations
/// (p outside (0, 0.5), tau <= 0, var_cap < 0, or M <= 0).
RiskSpec make_risk_spec(double p, double tau, double var_cap, const MarketParams& params);

enum class CaseTag { DegenerateHalfLine, HalfLine, ClosedInterval, Empty };

const char* to_string(CaseTag tag);

/// Admissible strategy set under the VaR ceiling.
struct FeasibleSet {
  CaseTag case_tag = CaseTag::Empty;
  double lower = 0.0;  // -inf marker allowed
  double upper = 0.0;  // +inf marker for half-lines
  std::optional<std::pair<double, double>> roots;  // (f2, f1) with f2 <= f1

  bool contains(double f) const {
    switch (case_tag) {
      case CaseTag::Empty:
        return false;
      case CaseTag::ClosedInterval:
        return lower <= f && f <= upper;
      default:
        return f >= lower;
    }
  }
};

/// Every intermediate quantity of the classification, for reports.
struct CaseDiagnostics {
  double N = 0.0;
  double M = 0.0;
  double quad_a = 0.0;  // N^2 sigma^2 - mu^2
  double quad_b = 0.0;  // 2 (rho sigma beta N^2 - mu M)
  double quad_c = 0.0;  // N^2 beta^2 - M^2
  double delta = 0.0;   // 4 N^2 ((1-rho^2) beta^2 (mu^2 - N^2 sigma^2) + (sigma M - rho beta mu)^2)
  double tangency_bound = 0.0;    // (sigma M - rho beta mu)^2 / ((1-rho^2) beta^2)
  double rho_beta_n_minus_m = 0.0;
  bool degenerate = false;          // N sigma = mu within tolerance
  bool slope_below = false;         // N sigma < mu
  bool delta_nonneg = false;
  bool axis_right_of_floor = false;  // rho beta mu < sigma M
  CaseTag tag = CaseTag::Empty;
  std::optional<std::pair<double, double>> roots;  // (f2, f1) when the quadratic has real roots
};

/// p-quantile of the projected gain over one horizon under constant f:
/// tau (f mu + alpha) + sqrt(tau) sqrt(f^2 sigma^2 + beta^2 + 2 rho sigma beta f) Phi^{-1}(p).
double quantile_of_gain(const MarketParams& params, const RiskSpec& spec, double f);

/// VaR = (quantile_of_gain)^- = max(0, -Q). Always >= 0.
double var_of_strategy(const MarketParams& params, const RiskSpec& spec, double f);

CaseDiagnostics classify_case(const MarketParams& params, const RiskSpec& spec);

FeasibleSet feasible_set(const MarketParams& params, const RiskSpec& spec);

}  // namespace mvar
