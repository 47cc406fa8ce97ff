#pragma once

#include <cmath>
#include <cstdint>

namespace mvar {

/// splitmix64 step; also used to derive independent per-chunk seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Deterministic seed for worker chunk `stream` of a run keyed by `master`.
inline std::uint64_t chunk_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (0xD1B54A32D192ED03ull * (stream + 1));
  return splitmix64(s);
}

/// xoshiro256++ (Blackman & Vigna). Fully specified bit-for-bit, so streams
/// are reproducible across compilers and standard libraries.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    for (auto& w : state_) w = splitmix64(seed);
    state_[0] |= 1ull;  // never all-zero
  }

  std::uint64_t operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

namespace detail {

/// Ziggurat strip tables for the standard normal (128 strips, Doornik layout).
struct ZigguratTables {
  static constexpr int kStrips = 128;
  static constexpr double kR = 3.442619855899;
  static constexpr double kV = 9.91256303526217e-3;
  double edge[kStrips + 1];
  double ratio[kStrips];

  ZigguratTables() {
    edge[0] = kV / std::exp(-0.5 * kR * kR);
    edge[1] = kR;
    edge[kStrips] = 0.0;
    for (int i = 2; i < kStrips; ++i)
      edge[i] = std::sqrt(
          -2.0 * std::log(kV / edge[i - 1] + std::exp(-0.5 * edge[i - 1] * edge[i - 1])));
    for (int i = 0; i < kStrips; ++i) ratio[i] = edge[i + 1] / edge[i];
  }
};

inline const ZigguratTables& ziggurat_tables() {
  static const ZigguratTables tables;
  return tables;
}

}  // namespace detail

/// Standard normal sampler: ziggurat rejection over xoshiro256++.
/// About 3x faster than std::normal_distribution over std::mt19937_64, which
/// matters for the path simulator's billions of draws.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1) from the top 53 bits of a draw.
  static double to_unit(std::uint64_t r) { return (r >> 11) * 0x1.0p-53; }
  /// Uniform in (0, 1], safe as a log argument.
  static double to_unit_open(std::uint64_t r) { return ((r >> 11) + 1) * 0x1.0p-53; }

  double operator()() {
    const auto& zig = detail::ziggurat_tables();
    for (;;) {
      const std::uint64_t r = eng_();
      const int i = static_cast<int>(r & 127u);  // low bits; (0,1) uses bits 11+
      const double u = 2.0 * to_unit(r) - 1.0;
      if (std::fabs(u) < zig.ratio[i]) return u * zig.edge[i];
      if (i == 0) return tail(u < 0.0);
      const double x = u * zig.edge[i];
      const double f0 = std::exp(-0.5 * (zig.edge[i] * zig.edge[i] - x * x));
      const double f1 = std::exp(-0.5 * (zig.edge[i + 1] * zig.edge[i + 1] - x * x));
      if (f1 + to_unit(eng_()) * (f0 - f1) < 1.0) return x;
    }
  }

  std::uint64_t raw() { return eng_(); }

 private:
  double tail(bool negative) {
    // Marsaglia tail method beyond the last strip edge.
    constexpr double r = detail::ZigguratTables::kR;
    double x, y;
    do {
      x = std::log(to_unit_open(eng_())) / r;
      y = std::log(to_unit_open(eng_()));
    } while (-2.0 * y < x * x);
    return negative ? x - r : r - x;
  }

  Xoshiro256pp eng_;
};

}  // namespace mvar
