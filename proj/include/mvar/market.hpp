#pragma once

#include <Eigen/Core>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mvar/rng.hpp"

namespace mvar {

/// Single risky stock plus an untradable cash flow, driven by two Brownian
/// motions with correlation rho.
struct MarketParams {
  double mu;     // stock appreciation rate, per year
  double sigma;  // stock volatility, per sqrt(year)
  double alpha;  // cash-flow drift, per year
  double beta;   // cash-flow diffusion, per sqrt(year)
  double rho;    // correlation of the two drivers

  bool operator==(const MarketParams&) const = default;
};

struct Preference {
  double gamma;  // risk-aversion weight in x - gamma x^2
  double T;      // terminal time, years
  double x0;     // initial wealth

  bool operator==(const Preference&) const = default;
};

struct SimConfig {
  std::int64_t n_paths = 100000;
  double dt = 1.0 / 260.0;
  std::uint64_t master_seed = 1;
  std::int64_t chunk_size = 8192;  // paths per worker unit; part of the stream layout

  bool operator==(const SimConfig&) const = default;
};

/// Terminal-wealth sample with mean-variance utility statistics.
struct PathBatch {
  Eigen::ArrayXd terminal_wealth;
  double mean_utility = 0.0;  // sample mean of X_T - gamma X_T^2
  double std_error = 0.0;     // standard error of that mean
};

class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(std::int64_t path_index)
      : std::runtime_error("simulate_paths: non-finite wealth on path " +
                           std::to_string(path_index)),
        path_index(path_index) {}
  std::int64_t path_index;
};

/// Throws std::domain_error naming the first violated model assumption.
void validate_params(const MarketParams& params, const Preference& pref);

/// f^2 sigma^2 + beta^2 + 2 rho sigma beta f -- instantaneous variance of the
/// wealth process per unit time under strategy f. Bounded below by
/// beta^2 (1 - rho^2) > 0.
inline double wealth_variance_rate(const MarketParams& p, double f) {
  return f * f * p.sigma * p.sigma + p.beta * p.beta + 2.0 * p.rho * p.sigma * p.beta * f;
}

struct GaussianLaw {
  double mean;
  double variance;
};

/// Law of X_T started from (t, x) under a strategy held constant at f.
GaussianLaw gaussian_terminal_law(const MarketParams& params, double f, double t, double x,
                                  double T);

struct IncrementPairs {
  Eigen::ArrayXd dw1;
  Eigen::ArrayXd dw2;
};

/// Correlated Brownian increment pairs over a step dt:
/// dW2 = rho dW1 + sqrt(1 - rho^2) dWperp. rho may be +-1 here (generator
/// tests exercise the degenerate case even though the model forbids it).
IncrementPairs correlated_increments(double rho, double dt, std::int64_t count,
                                     std::uint64_t seed);

using PolicyFn = std::function<double(double t, double x)>;

namespace detail {

struct StepGrid {
  std::int64_t n_steps;
  double dt;
  double T;
  double step(std::int64_t k) const {
    return k + 1 == n_steps ? T - static_cast<double>(k) * dt : dt;
  }
  double time(std::int64_t k) const { return static_cast<double>(k) * dt; }
};

inline StepGrid make_step_grid(double T, double dt) {
  auto n = static_cast<std::int64_t>(std::ceil(T / dt - 1e-9));
  if (n < 1) n = 1;
  return {n, dt, T};
}

template <class Policy>
std::optional<std::int64_t> run_chunk(const MarketParams& params, const Preference& pref,
                                      Policy&& policy, const SimConfig& cfg,
                                      std::int64_t chunk_index, std::int64_t first,
                                      std::int64_t last, const StepGrid& grid,
                                      double* terminal) {
  NormalSampler rng(chunk_seed(cfg.master_seed, static_cast<std::uint64_t>(chunk_index)));
  const double drift_vol = params.sigma;
  const double hedge = params.beta * params.rho;
  const double ortho = params.beta * std::sqrt(1.0 - params.rho * params.rho);
  for (std::int64_t p = first; p < last; ++p) {
    double x = pref.x0;
    for (std::int64_t k = 0; k < grid.n_steps; ++k) {
      const double t = grid.time(k);
      const double h = grid.step(k);
      const double sq = std::sqrt(h);
      const double f = policy(t, x);
      const double z1 = rng();
      const double z2 = rng();
      x += (f * params.mu + params.alpha) * h + (f * drift_vol + hedge) * sq * z1 +
           ortho * sq * z2;
      if (!std::isfinite(x)) return p;
    }
    terminal[p] = x;
  }
  return std::nullopt;
}

}  // namespace detail

/// Euler-Maruyama simulation of the wealth SDE under policy(t, x).
///
/// Paths are partitioned into chunks of cfg.chunk_size; each chunk draws from
/// its own seed stream, so serial and parallel runs produce identical batches
/// bit for bit for a fixed (seed, n_paths, dt, chunk_size).
template <class Policy>
PathBatch simulate_paths(const MarketParams& params, const Preference& pref, Policy&& policy,
                         const SimConfig& cfg) {
  if (cfg.n_paths < 1) throw std::domain_error("simulate_paths: n_paths must be >= 1");
  if (!(cfg.dt > 0.0) || cfg.dt > pref.T)
    throw std::domain_error("simulate_paths: dt must satisfy 0 < dt <= T");
  if (cfg.chunk_size < 1) throw std::domain_error("simulate_paths: chunk_size must be >= 1");

  const auto grid = detail::make_step_grid(pref.T, cfg.dt);
  PathBatch batch;
  batch.terminal_wealth.resize(cfg.n_paths);
  double* terminal = batch.terminal_wealth.data();

  const std::int64_t n_chunks = (cfg.n_paths + cfg.chunk_size - 1) / cfg.chunk_size;
  const unsigned hw = std::thread::hardware_concurrency();
  const std::int64_t n_workers =
      std::min<std::int64_t>(n_chunks, hw == 0 ? 1 : static_cast<std::int64_t>(hw));

  std::atomic<std::int64_t> next_chunk{0};
  std::atomic<std::int64_t> first_bad_path{-1};

  auto work = [&] {
    for (;;) {
      const std::int64_t c = next_chunk.fetch_add(1);
      if (c >= n_chunks) return;
      const std::int64_t first = c * cfg.chunk_size;
      const std::int64_t last = std::min<std::int64_t>(first + cfg.chunk_size, cfg.n_paths);
      const auto bad = detail::run_chunk(params, pref, policy, cfg, c, first, last, grid,
                                         terminal);
      if (bad) {
        std::int64_t cur = first_bad_path.load();
        while ((cur < 0 || *bad < cur) && !first_bad_path.compare_exchange_weak(cur, *bad)) {
        }
      }
    }
  };

  if (n_workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (std::int64_t w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  if (first_bad_path.load() >= 0) throw SimulationError(first_bad_path.load());

  // Merged statistics in fixed path order, independent of worker count.
  double mean = 0.0;
  for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
    const double x = terminal[i];
    mean += x - pref.gamma * x * x;
  }
  mean /= static_cast<double>(cfg.n_paths);
  double ss = 0.0;
  for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
    const double x = terminal[i];
    const double d = x - pref.gamma * x * x - mean;
    ss += d * d;
  }
  batch.mean_utility = mean;
  batch.std_error = cfg.n_paths > 1
                        ? std::sqrt(ss / (static_cast<double>(cfg.n_paths) *
                                          static_cast<double>(cfg.n_paths - 1)))
                        : 0.0;
  return batch;
}

}  // namespace mvar
