#include <doctest.h>

#include <cmath>
#include <vector>

#include "mvar/normal.hpp"
#include "mvar/rng.hpp"

using mvar::NormalSampler;

TEST_CASE("normal sampler moments at 4 standard errors") {
  NormalSampler rng(20260810);
  const std::int64_t n = 4'000'000;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double z = rng();
    m1 += z;
    m2 += z * z;
    m3 += z * z * z;
    m4 += z * z * z * z;
  }
  const double dn = static_cast<double>(n);
  m1 /= dn;
  m2 /= dn;
  m3 /= dn;
  m4 /= dn;
  const double se = 1.0 / std::sqrt(dn);
  CHECK(std::abs(m1) < 4.0 * se);
  CHECK(std::abs(m2 - 1.0) < 4.0 * std::sqrt(2.0) * se);
  CHECK(std::abs(m3) < 4.0 * std::sqrt(15.0) * se);   // Var(Z^3) = 15
  CHECK(std::abs(m4 - 3.0) < 4.0 * std::sqrt(96.0) * se);  // Var(Z^4) = 96
}

TEST_CASE("normal sampler tail frequencies match the CDF") {
  NormalSampler rng(7);
  const std::int64_t n = 4'000'000;
  const double cuts[] = {-3.0, -2.0, -1.0, 0.0, 0.5, 1.5, 2.5, 3.4442, 3.8};
  std::vector<std::int64_t> hits(std::size(cuts), 0);
  for (std::int64_t i = 0; i < n; ++i) {
    const double z = rng();
    for (std::size_t c = 0; c < std::size(cuts); ++c)
      if (z <= cuts[c]) ++hits[c];
  }
  for (std::size_t c = 0; c < std::size(cuts); ++c) {
    const double p = mvar::norm_cdf(cuts[c]);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(static_cast<double>(hits[c]) / static_cast<double>(n) - p) < 4.0 * se);
  }
}

TEST_CASE("sampler streams are reproducible and seed-sensitive") {
  NormalSampler a(99), b(99), c(100);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const double za = a(), zb = b(), zc = c();
    all_equal = all_equal && (za == zb);
    any_diff = any_diff || (za != zc);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("chunk seeds decorrelate streams") {
  const auto s0 = mvar::chunk_seed(123, 0);
  const auto s1 = mvar::chunk_seed(123, 1);
  const auto t0 = mvar::chunk_seed(124, 0);
  CHECK(s0 != s1);
  CHECK(s0 != t0);
  // Crude cross-correlation screen between adjacent chunk streams.
  NormalSampler a(s0), b(s1);
  const std::int64_t n = 200'000;
  double cross = 0;
  for (std::int64_t i = 0; i < n; ++i) cross += a() * b();
  CHECK(std::abs(cross / static_cast<double>(n)) < 4.0 / std::sqrt(static_cast<double>(n)));
}
