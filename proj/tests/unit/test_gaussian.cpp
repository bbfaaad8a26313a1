#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "scou/gaussian.hpp"
#include "scou/rng.hpp"

namespace {

long double logcdf_oracle(long double z) {
  if (z > 0) return std::log1p(-0.5L * std::erfc(z / std::sqrt(2.0L)));
  return std::log(0.5L * std::erfc(-z / std::sqrt(2.0L)));
}

TEST(Gaussian, PdfAtMean) {
  EXPECT_NEAR(scou::normal_pdf(0.0, 0.0, 0.6), 1.0 / (0.6 * std::sqrt(2.0 * std::numbers::pi)), 1e-15);
  EXPECT_NEAR(scou::normal_pdf(0.0, 0.0, 0.6), 0.6649038006690545, 1e-12);
}

TEST(Gaussian, CdfKnownValues) {
  EXPECT_DOUBLE_EQ(scou::std_normal_cdf(0.0), 0.5);
  EXPECT_NEAR(scou::std_normal_cdf(1.959963984540054), 0.975, 1e-15);
  EXPECT_NEAR(scou::std_normal_cdf(-1.0), 0.15865525393145707, 1e-16);
  EXPECT_NEAR(scou::normal_cdf(3.0, 3.0, 0.6), 0.5, 1e-16);
}

TEST(Gaussian, CdfLowerTailRelativeAccuracy) {
  for (double z : {-5.0, -10.0, -20.0, -30.0, -37.0}) {
    const long double want = 0.5L * std::erfc(-static_cast<long double>(z) / std::sqrt(2.0L));
    EXPECT_LT(std::abs((scou::std_normal_cdf(z) - want) / want), 1e-12) << z;
  }
}

TEST(Gaussian, LogCdfMatchesLongDoubleOracle) {
  for (double z = -80.0; z <= 8.0; z += 0.37) {
    const long double want = logcdf_oracle(z);
    EXPECT_LT(std::abs((scou::std_normal_logcdf(z) - want) / want), 1e-12) << z;
  }
}

TEST(Gaussian, LogCdfFiniteFarInTail) {
  EXPECT_TRUE(std::isfinite(scou::std_normal_logcdf(-1e6)));
  const long double z = -1e4L;
  const long double asymptotic =
      -0.5L * z * z - std::log(-z) - 0.5L * std::log(2.0L * std::numbers::pi_v<long double>) + std::log1p(-1.0L / (z * z));
  EXPECT_NEAR(scou::std_normal_logcdf(-1e4), static_cast<double>(asymptotic), 1e-6);
  EXPECT_EQ(scou::std_normal_logcdf(40.0), 0.0);
}

TEST(Gaussian, InverseMillsRatio) {
  EXPECT_NEAR(scou::inverse_mills_ratio(0.0), std::sqrt(2.0 / std::numbers::pi), 1e-15);
  for (double z : {-45.0, -38.0, -36.0, -10.0, 2.5}) {
    const long double phi = std::exp(-0.5L * z * z) / std::sqrt(2.0L * std::numbers::pi_v<long double>);
    const long double cdf = 0.5L * std::erfc(-static_cast<long double>(z) / std::sqrt(2.0L));
    EXPECT_LT(std::abs(scou::inverse_mills_ratio(z) - phi / cdf) / (phi / cdf), 1e-10) << z;
  }
}

TEST(Gaussian, QuantileInvertsCdf) {
  for (double q : {1e-12, 1e-6, 0.0002, 0.025, 0.3, 0.5, 0.8, 0.975, 0.9998, 1.0 - 1e-9})
    EXPECT_NEAR(scou::std_normal_cdf(scou::std_normal_quantile(q)), q, 1e-14 + 1e-12 * q) << q;
  EXPECT_NEAR(scou::std_normal_quantile(0.975), 1.959963984540054, 1e-12);
}

TEST(Gaussian, LogSumExp) {
  const std::vector<double> v{-1000.0, -1000.0};
  EXPECT_NEAR(scou::log_sum_exp(v), -1000.0 + std::log(2.0), 1e-12);
  const std::vector<double> all_neg_inf{scou::kNegInf, scou::kNegInf};
  EXPECT_EQ(scou::log_sum_exp(all_neg_inf), scou::kNegInf);
  EXPECT_NEAR(scou::log_add_exp(std::log(0.25), std::log(0.5)), std::log(0.75), 1e-15);
}

TEST(Rng, StreamsAreDistinctAndReproducible) {
  auto a = scou::make_stream(5, 0), b = scou::make_stream(5, 1), c = scou::make_stream(5, 0);
  const auto va = a(), vb = b(), vc = c();
  EXPECT_NE(va, vb);
  EXPECT_EQ(va, vc);
  auto r = scou::make_stream(1, 2);
  for (int i = 0; i < 1000; ++i) {
    const double u = scou::uniform01(r);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

}  // namespace
