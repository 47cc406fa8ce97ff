#pragma once

namespace mvar {

/// Standard normal density.
double norm_pdf(double x);

/// Standard normal CDF, evaluated through erfc so both tails keep full
/// relative accuracy.
double norm_cdf(double x);

/// Inverse standard normal CDF for p in (0, 1).
///
/// Rational approximation (Acklam) polished with one Newton step against the
/// erfc-based CDF; absolute error below 1e-12 over the whole open interval.
/// Throws std::domain_error outside (0, 1).
double norm_quantile(double p);

}  // namespace mvar
