#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "scou/grid_hmm.hpp"
#include "scou/model.hpp"

namespace scou {

// Per-day posterior of X_t given every observation.
struct PosteriorSummary {
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<double> lower;
  std::vector<double> upper;
  double coverage = 0.95;
  double log_likelihood = 0.0;
  std::optional<RowMatrix> marginals;  // n x D, rows sum to one
};

// Normalized exp(log_f + log_b), one row per day.
RowMatrix smoothed_marginals(const FBTables& fb);

// P(X_{t-1} = x, X_t = x' | Y) for day t (1-based, t >= 2), D x D.
RowMatrix pairwise_marginal(const FBTables& fb, const EmissionTable& emissions,
                            const TransitionMatrix& pi, std::size_t t);

// Smallest grid value whose discrete CDF reaches `level`.
double discrete_quantile(const Eigen::RowVectorXd& probs, const std::vector<double>& values, double level);

PosteriorSummary summarize(const FBTables& fb, const Grid& grid, double coverage, bool keep_marginals = false);

PosteriorSummary smooth(const ObservationSeries& obs, const ModelParams& params, const Grid& grid,
                        double coverage = 0.95, bool keep_marginals = false);

// Exact posterior draws of the whole path on the grid; path k uses its own
// RNG stream derived from (seed, k).
std::vector<LatentPath> sample_paths(const FBTables& fb, const EmissionTable& emissions,
                                     const TransitionMatrix& pi, const Grid& grid, std::size_t n_paths,
                                     std::uint64_t seed);

std::vector<LatentPath> sample_paths(const ObservationSeries& obs, const ModelParams& params,
                                     const Grid& grid, std::size_t n_paths, std::uint64_t seed);

inline constexpr double kDefaultOutlierThreshold = 0.95;

struct OutlierReport {
  std::vector<std::optional<double>> probability;  // per day; empty when unobserved
  std::vector<bool> flagged;                       // per day
  double threshold = kDefaultOutlierThreshold;

  std::size_t flagged_count() const;
};

OutlierReport outlier_probabilities(const ObservationSeries& obs, const ModelParams& params,
                                    const Grid& grid);

// Flags days whose outlier probability exceeds h, with 0 < h < 1.
OutlierReport detect_outliers(OutlierReport report, double h);

}  // namespace scou
