#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <span>

namespace scou {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

inline double normal_pdf(double x, double mean, double sd) {
  return std::exp(normal_logpdf(x, mean, sd));
}

// Standard normal CDF via the complementary error function, which keeps
// full relative accuracy in the lower tail (no 1 - erf cancellation).
inline double std_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

inline double normal_cdf(double x, double mean, double sd) {
  return std_normal_cdf((x - mean) / sd);
}

// log Phi(z), finite for every finite z.
double std_normal_logcdf(double z);

inline double normal_logcdf(double x, double mean, double sd) {
  return std_normal_logcdf((x - mean) / sd);
}

// phi(z) / Phi(z), stable for very negative z.
double inverse_mills_ratio(double z);

// Inverse of the standard normal CDF.
double std_normal_quantile(double prob);

inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = a > b ? a : b;
  const double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

double log_sum_exp(std::span<const double> values);

}  // namespace scou
