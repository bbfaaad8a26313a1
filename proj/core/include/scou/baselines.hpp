#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scou/model.hpp"

namespace scou {

// Observation series with censored values replaced by E[Z | Z <= ell_t]
// under a censored-normal fit Z ~ N(mu, sigma^2).
struct ImputedSeries {
  std::vector<std::optional<double>> values;  // per day
  std::vector<bool> imputed;                  // per day
  double mu = 0.0;
  double sigma = 0.0;
  std::vector<std::string> warnings;
};

// `floor` bounds imputed values from below; defaults to min - (max - min) of
// the observed values.
ImputedSeries impute_censored(const ObservationSeries& obs, std::optional<double> floor = std::nullopt);

// Per-day values of a series as-is (censored entries stay at their limit).
ImputedSeries raw_values(const ObservationSeries& obs);

// Maximum-likelihood (mu, sigma) of a left-censored normal sample.
struct CensoredNormalFit {
  double mu = 0.0;
  double sigma = 0.0;
  double log_likelihood = 0.0;
};
CensoredNormalFit fit_censored_normal(const ObservationSeries& obs);

// E[Z | Z <= ell] for Z ~ N(mu, sigma^2).
double truncated_normal_upper_mean(double mu, double sigma, double ell);

// Local-level model X_t = X_{t-1} + sigma * eps, Y_t = X_t + tau * eps with
// a diffuse N(0, 1e7) prior on X_1.
struct LocalLevelResult {
  std::vector<double> mean;      // smoothed E[X_t | Y]
  std::vector<double> variance;  // smoothed Var[X_t | Y]
  double log_likelihood = 0.0;
  double sigma = 0.0;
  double tau = 0.0;
  bool converged = true;
};

inline constexpr double kDiffusePriorVariance = 1e7;

LocalLevelResult local_level_smoother(const std::vector<std::optional<double>>& values, double sigma,
                                      double tau);
double local_level_log_likelihood(const std::vector<std::optional<double>>& values, double sigma, double tau);

// Fits (sigma, tau) by exact Gaussian maximum likelihood, then smooths.
// With `imputed`, censored values are first replaced via impute_censored.
LocalLevelResult kalman2_smooth(const ObservationSeries& obs, bool imputed = false);

// Centered mean of the observed values within +-(window/2) days. Days with
// no observed value in the window are empty.
std::vector<std::optional<double>> moving_average(const std::vector<std::optional<double>>& values,
                                                  int window_days);

// Locally weighted polynomial regression (tricube weights over the
// span-fraction nearest observed days), evaluated at every day.
std::vector<std::optional<double>> loess_smooth(const std::vector<std::optional<double>>& values, double span,
                                                int degree = 1, std::vector<std::string>* warnings = nullptr);

enum class BaselineMethod { kalman2, moving_average, loess };

struct CandidateScore {
  double candidate = 0.0;
  std::optional<double> rmse;  // empty when infeasible
};

struct LooCvResult {
  double chosen = 0.0;
  std::vector<CandidateScore> table;
};

std::vector<double> default_window_candidates();  // 3, 5, ..., 41
std::vector<double> default_span_candidates();    // 0.10, 0.12, ..., 0.90

// Leave-one-out selection of the window (moving average) or span (LOESS);
// ties go to the larger candidate.
LooCvResult loo_cv_select(const std::vector<std::optional<double>>& values, BaselineMethod method,
                          const std::vector<double>& candidates, int loess_degree = 1);

struct BaselineConfig {
  enum class Selection { fixed, loo_cv };
  BaselineMethod method = BaselineMethod::moving_average;
  int window_days = 23;
  double span = 0.24;
  int loess_degree = 1;
  Selection selection = Selection::loo_cv;
  std::vector<double> candidates;  // empty: method defaults

  void validate() const;
};

struct BaselineOutput {
  std::vector<std::optional<double>> mean;
  std::optional<std::vector<double>> variance;  // kalman2 only
  double chosen = 0.0;                          // selected window or span
};

BaselineOutput run_baseline(const ObservationSeries& obs, const BaselineConfig& cfg);

}  // namespace scou
