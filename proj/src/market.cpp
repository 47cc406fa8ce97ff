#include "mvar/market.hpp"

namespace mvar {

void validate_params(const MarketParams& params, const Preference& pref) {
  if (!(params.mu > 0.0)) throw std::domain_error("mu must be positive");
  if (!(params.sigma > 0.0)) throw std::domain_error("sigma must be positive");
  if (!(params.beta > 0.0)) throw std::domain_error("beta must be positive");
  if (!(params.rho * params.rho < 1.0))
    throw std::domain_error("correlation must satisfy rho^2 < 1");
  if (!std::isfinite(params.alpha)) throw std::domain_error("alpha must be finite");
  if (!(pref.gamma > 0.0)) throw std::domain_error("gamma must be positive");
  if (!(pref.T > 0.0)) throw std::domain_error("T must be positive");
  if (!std::isfinite(pref.x0)) throw std::domain_error("x0 must be finite");
}

GaussianLaw gaussian_terminal_law(const MarketParams& params, double f, double t, double x,
                                  double T) {
  if (t > T) throw std::domain_error("gaussian_terminal_law: t must not exceed T");
  const double horizon = T - t;
  return {x + (f * params.mu + params.alpha) * horizon,
          wealth_variance_rate(params, f) * horizon};
}

IncrementPairs correlated_increments(double rho, double dt, std::int64_t count,
                                     std::uint64_t seed) {
  if (!(dt > 0.0)) throw std::domain_error("correlated_increments: dt must be positive");
  if (count < 0) throw std::domain_error("correlated_increments: count must be >= 0");
  IncrementPairs out;
  out.dw1.resize(count);
  out.dw2.resize(count);
  NormalSampler rng(seed);
  const double sq = std::sqrt(dt);
  const double ortho = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (std::int64_t i = 0; i < count; ++i) {
    const double w1 = sq * rng();
    const double wp = sq * rng();
    out.dw1[i] = w1;
    out.dw2[i] = rho * w1 + ortho * wp;
  }
  return out;
}

}  // namespace mvar
