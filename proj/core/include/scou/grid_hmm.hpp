#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "scou/model.hpp"

namespace scou {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Equally spaced state grid {a, a + step, ..., b} with d points.
struct Grid {
  double a = 0.0;
  double b = 1.0;
  std::size_t d = 2;
  double step = 1.0;
  std::vector<double> values;

  static Grid uniform(double a, double b, std::size_t d);
  // Smallest grid over [a, b] whose spacing does not exceed target_step.
  static Grid with_step(double a, double b, double target_step);
  // Spacing <= 0.1 * min(sigma, tau), with d clamped to [201, 2000].
  static Grid with_default_resolution(double a, double b, double sigma, double tau);
};

// Row-stochastic D x D matrix; row x holds P(X_{t+1} = . | X_t = x).
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  // Validates non-negativity and unit row sums (1e-12).
  static TransitionMatrix from_probabilities(RowMatrix prob);

  std::size_t size() const { return static_cast<std::size_t>(prob_.rows()); }
  const RowMatrix& prob() const { return prob_; }
  const RowMatrix& log_prob() const { return log_prob_; }

 private:
  friend TransitionMatrix build_transition(const ModelParams&, const Grid&);
  RowMatrix prob_;
  RowMatrix log_prob_;
};

// Row-normalized Gaussian kernel N(x'; eta * x + delta, sigma^2) over the grid.
TransitionMatrix build_transition(const ModelParams& params, const Grid& grid);

// e_t(x) = P(Y_t = y_t | X_t = x), stored in log form. Rows of unobserved
// days are identically one.
class EmissionTable {
 public:
  EmissionTable() = default;
  // From strictly positive probabilities (n x D).
  static EmissionTable from_values(const RowMatrix& values);
  static EmissionTable from_log_values(RowMatrix log_values);

  std::size_t steps() const { return static_cast<std::size_t>(log_.rows()); }
  std::size_t states() const { return static_cast<std::size_t>(log_.cols()); }

  const RowMatrix& log_values() const { return log_; }
  double value(std::size_t t, std::size_t x) const;
  // exp(log e_t - row_max_t); every row has maximum exactly one.
  const RowMatrix& scaled() const { return scaled_; }
  const std::vector<double>& row_log_scale() const { return row_max_; }

  // Number of censored days whose limit fell below a (outlier mass clamped to 0).
  std::size_t clamped_censored_mass() const { return clamped_; }

 private:
  friend EmissionTable build_emissions(const ObservationSeries&, const ModelParams&, const Grid&);
  void finalize();

  RowMatrix log_;
  RowMatrix scaled_;
  std::vector<double> row_max_;
  std::size_t clamped_ = 0;
};

EmissionTable build_emissions(const ObservationSeries& obs, const ModelParams& params, const Grid& grid);

// Forward/backward quantities in natural-log form. Rows are days (0-based),
// columns are grid states.
struct FBTables {
  RowMatrix log_f;
  RowMatrix log_b;
  double log_likelihood = 0.0;
};

struct ForwardResult {
  RowMatrix log_f;
  double log_likelihood = 0.0;
};

// F_1(x) = e_1(x) / D, F_t(x') = sum_x F_{t-1}(x) pi(x, x') e_t(x').
ForwardResult forward(const EmissionTable& emissions, const TransitionMatrix& pi);

// B_n(x) = 1, B_{t-1}(x) = sum_x' pi(x, x') e_t(x') B_t(x').
RowMatrix backward(const EmissionTable& emissions, const TransitionMatrix& pi);

FBTables forward_backward(const EmissionTable& emissions, const TransitionMatrix& pi);

// log sum_x F_n(x) without materializing the tables.
double log_likelihood(const EmissionTable& emissions, const TransitionMatrix& pi);

}  // namespace scou
