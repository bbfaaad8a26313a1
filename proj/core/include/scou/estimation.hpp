#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scou/errors.hpp"
#include "scou/grid_hmm.hpp"
#include "scou/model.hpp"

namespace scou {

enum class Param { eta, delta, sigma, tau, p };
inline constexpr std::array<Param, 5> kAllParams{Param::eta, Param::delta, Param::sigma, Param::tau,
                                                 Param::p};

std::string_view param_name(Param param);
Param parse_param(std::string_view name);
double get_param(const ModelParams& params, Param param);
void set_param(ModelParams& params, Param param, double value);

struct FixedParams {
  std::optional<double> eta, delta, sigma, tau, p;

  std::optional<double> get(Param param) const;
  void set(Param param, double value);
  bool is_fixed(Param param) const { return get(param).has_value(); }
};

// Free-parameter coordinates: eta and delta untransformed, sigma and tau on
// the log scale, p on the logit scale. Fixed parameters are skipped.
class ParamTransform {
 public:
  explicit ParamTransform(FixedParams fixed);

  std::size_t dimension() const { return free_.size(); }
  const std::vector<Param>& free_params() const { return free_; }

  std::vector<double> to_free(const ModelParams& params) const;
  // Starts from `base` (which supplies a, b and fixed values) and overwrites
  // the free parameters.
  ModelParams from_free(const std::vector<double>& z, const ModelParams& base) const;

 private:
  FixedParams fixed_;
  std::vector<Param> free_;
};

struct GridSpec {
  std::optional<std::size_t> d;
  std::optional<double> step;
};

struct FitConfig {
  FixedParams fixed;
  std::optional<ModelParams> init;  // nullopt: automatic initialization
  std::size_t restarts = 3;
  std::size_t max_evals = 2000;     // per restart
  double tol = 1e-7;
  GridSpec grid;
  std::optional<OutlierBounds> bounds;  // nullopt: quantiles of the observed values
  double bounds_lo_q = 0.0002;
  double bounds_hi_q = 0.9998;
  double bounds_margin = 0.0;
  bool eta_barrier = false;         // soft log-barrier for eta in (1.05, 1.1)
  std::uint64_t seed = 1;

  void validate() const;
};

struct FitResult {
  ModelParams params;
  double log_likelihood = 0.0;
  std::size_t evals_used = 0;
  bool converged = false;
  std::vector<double> restart_scores;
  Grid grid;
};

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, FitResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const FitResult& partial() const { return partial_; }

 private:
  FitResult partial_;
};

inline constexpr std::size_t kMinObservationsForFit = 10;

// Automatic starting point for the optimizer, given the outlier bounds.
ModelParams auto_initial_params(const ObservationSeries& obs, const OutlierBounds& bounds);

// Grid and bounds that fit() would use for this series and configuration.
Grid resolve_fit_grid(const ObservationSeries& obs, const FitConfig& cfg);

double log_likelihood_at(const ObservationSeries& obs, const ModelParams& params, const Grid& grid);

FitResult fit(const ObservationSeries& obs, const FitConfig& cfg);

struct ProfilePoint {
  double value = 0.0;
  std::optional<double> log_likelihood;
  std::optional<ModelParams> params;
  std::string error;
};

std::vector<ProfilePoint> profile_likelihood(const ObservationSeries& obs, const FitConfig& cfg,
                                             Param param, const std::vector<double>& values);

}  // namespace scou
