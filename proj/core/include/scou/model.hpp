#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "scou/gaussian.hpp"

namespace scou {

// Parameters of the AR(1) latent process, the measurement noise, and the
// uniform outlier law on [a, b].
struct ModelParams {
  double eta = 1.0;
  double delta = 0.0;
  double sigma = 1.0;
  double tau = 1.0;
  double p = 0.0;
  double a = 0.0;
  double b = 1.0;

  // Throws ValidationError unless sigma > 0, tau > 0, p in [0,1], a < b and
  // everything is finite.
  void validate() const;
  // Same as validate() but admits sigma == 0 and tau == 0 (noiseless simulation).
  void validate_for_simulation() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct Observation {
  int t = 0;                 // 1-based day index
  std::optional<double> y;   // recorded value; at the limit when censored
  double ell = kNegInf;      // censoring limit for the day
  bool censored = false;

  friend bool operator==(const Observation&, const Observation&) = default;
};

class ObservationSeries {
 public:
  ObservationSeries() = default;
  explicit ObservationSeries(std::vector<Observation> entries);

  // Builds a series from raw measurements: values <= ell are censored and
  // stored at ell. `ell` has either one entry (constant) or one per day.
  static ObservationSeries from_measurements(std::span<const std::optional<double>> values,
                                             std::span<const double> ell);

  std::size_t size() const { return entries_.size(); }
  const Observation& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<Observation>& entries() const { return entries_; }

  std::size_t observed_count() const;
  std::size_t censored_count() const;
  std::vector<double> observed_values() const;

  // Copy restricted to days 1..length.
  ObservationSeries truncated(std::size_t length) const;
  // Copy with day t (1-based) unobserved.
  ObservationSeries without_observation(std::size_t t) const;

  void validate() const;

  friend bool operator==(const ObservationSeries&, const ObservationSeries&) = default;

 private:
  std::vector<Observation> entries_;
};

struct LatentPath {
  std::vector<double> x;
  friend bool operator==(const LatentPath&, const LatentPath&) = default;
};

// Per-day or constant censoring limit.
class CensoringLimits {
 public:
  CensoringLimits() = default;
  static CensoringLimits constant(double ell) {
    CensoringLimits c;
    c.constant_ = ell;
    return c;
  }
  static CensoringLimits per_day(std::vector<double> ell) {
    CensoringLimits c;
    c.per_day_ = std::move(ell);
    return c;
  }
  // t is 0-based here.
  double at(std::size_t t) const { return per_day_.empty() ? constant_ : per_day_.at(t); }
  bool is_per_day() const { return !per_day_.empty(); }
  std::size_t size() const { return per_day_.size(); }

 private:
  double constant_ = kNegInf;
  std::vector<double> per_day_;
};

struct SimulationOptions {
  double obs_rate = 0.5;
  CensoringLimits ell = CensoringLimits::constant(kNegInf);
  std::optional<double> x1;
  std::uint64_t seed = 1;
  // When set, (a, b) are replaced by these quantiles of the marginal law of
  // the pre-measurements (see marginal_outlier_bounds).
  std::optional<std::pair<double, double>> bounds_from_marginal_quantiles;
};

struct SimulationOutput {
  LatentPath latent;
  std::vector<std::optional<double>> ystar;   // present for observed days
  std::vector<std::optional<bool>> outliers;  // present for observed days
  ObservationSeries observations;
  ModelParams params;  // generating parameters, with the (a, b) actually used
};

SimulationOutput simulate(const ModelParams& params, std::size_t n, const SimulationOptions& options);

// Re-censors a simulation at new limits (Y_t = max(Y*_t, ell_t)).
SimulationOutput apply_censoring(const SimulationOutput& sim, const CensoringLimits& ell);

// Lower-interpolation empirical quantile: sorted[floor(q * (m - 1))].
double empirical_quantile(std::span<const double> values, double q);

// Limit ell such that values <= ell make up roughly target_rate of the input.
double censor_limit_for_rate(std::span<const double> ystar_values, double target_rate);

struct OutlierBounds {
  double a;
  double b;
};

// Quantiles of the law of X_t + tau * eps pooled evenly over t = 1..n, with
// X_1 = x1 when given, stationary when |eta| < 1, delta otherwise.
OutlierBounds marginal_outlier_bounds(const ModelParams& params, std::size_t n, std::optional<double> x1,
                                      double lo_q = 0.0002, double hi_q = 0.9998);

OutlierBounds default_outlier_bounds(const ObservationSeries& observations, double lo_q = 0.0002,
                                     double hi_q = 0.9998, double margin = 0.0);

}  // namespace scou
