#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mvar/normal.hpp"
#include "oracle_values.hpp"

using mvar::norm_cdf;
using mvar::norm_pdf;
using mvar::norm_quantile;

TEST_CASE("quantile matches high-precision references to 1e-13") {
  const struct {
    double p, z;
  } cases[] = {
      {0.01, oracle::kQuantile001},   {0.001, oracle::kQuantile0001},
      {0.025, oracle::kQuantile0025}, {0.05, oracle::kQuantile005},
      {0.1, oracle::kQuantile010},    {0.25, oracle::kQuantile025},
      {0.4, oracle::kQuantile040},    {1e-10, oracle::kQuantile1em10},
      {0.49, oracle::kQuantile049},
  };
  for (const auto& c : cases) {
    CHECK(norm_quantile(c.p) == doctest::Approx(c.z).epsilon(1e-13));
    // Symmetry; forming 1 - p in floating point costs up to ulp/phi(z) of
    // quantile accuracy, so the extreme tail is excluded here.
    if (c.p >= 0.01)
      CHECK(norm_quantile(1.0 - c.p) == doctest::Approx(-c.z).epsilon(1e-12));
  }
  CHECK(norm_quantile(0.5) == 0.0);
}

TEST_CASE("quantile inverts the CDF to below 1e-12 absolute") {
  for (int k = 1; k < 500; ++k) {
    const double p = k / 500.0;
    const double z = norm_quantile(p);
    CHECK(std::abs(norm_cdf(z) - p) < 1e-12 * std::max(p, 1e-3));
    CHECK(std::abs(z - norm_quantile(norm_cdf(z))) < 1e-12);
  }
  // Deep tail round trips, absolute tolerance on the quantile itself.
  for (const double p : {1e-12, 1e-9, 1e-6, 1e-4}) {
    const double z = norm_quantile(p);
    CHECK(std::abs(norm_cdf(z) - p) < 1e-12 * p + 1e-300);
  }
}

TEST_CASE("quantile rejects arguments outside (0,1)") {
  CHECK_THROWS_AS(norm_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(norm_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(norm_quantile(-0.2), std::domain_error);
  CHECK_THROWS_AS(norm_quantile(1.2), std::domain_error);
}

TEST_CASE("pdf is the derivative of the cdf") {
  for (const double x : {-3.0, -1.0, -0.3, 0.0, 0.7, 2.5}) {
    const double h = 1e-6;
    const double fd = (norm_cdf(x + h) - norm_cdf(x - h)) / (2.0 * h);
    CHECK(norm_pdf(x) == doctest::Approx(fd).epsilon(1e-9));
  }
}
