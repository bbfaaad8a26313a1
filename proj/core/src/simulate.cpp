#include <algorithm>
#include <cmath>
#include <numeric>

#include "scou/errors.hpp"
#include "scou/gaussian.hpp"
#include "scou/model.hpp"
#include "scou/rng.hpp"

namespace scou {
namespace {

ObservationSeries censor(const std::vector<std::optional<double>>& ystar, const CensoringLimits& ell) {
  if (ell.is_per_day() && ell.size() != ystar.size())
    throw ValidationError("per-day censoring limits must cover every day");
  std::vector<Observation> entries(ystar.size());
  for (std::size_t i = 0; i < ystar.size(); ++i) {
    Observation& o = entries[i];
    o.t = static_cast<int>(i + 1);
    o.ell = ell.at(i);
    if (ystar[i]) {
      o.censored = *ystar[i] <= o.ell;
      o.y = std::max(*ystar[i], o.ell);
    }
  }
  return ObservationSeries(std::move(entries));
}

}  // namespace

SimulationOutput simulate(const ModelParams& params, std::size_t n, const SimulationOptions& options) {
  params.validate_for_simulation();
  if (n < 2) throw ValidationError("simulate: n must be at least 2");
  if (!(options.obs_rate > 0.0 && options.obs_rate <= 1.0))
    throw ValidationError("simulate: obs_rate must lie in (0, 1]");

  Rng rng{splitmix64(options.seed)};
  std::normal_distribution<double> normal(0.0, 1.0);

  SimulationOutput out;
  out.params = params;

  // Latent AR(1) path.
  auto& x = out.latent.x;
  x.resize(n);
  if (options.x1) {
    x[0] = *options.x1;
  } else if (std::abs(params.eta) < 1.0) {
    const double mean = params.delta / (1.0 - params.eta);
    const double sd = params.sigma / std::sqrt(1.0 - params.eta * params.eta);
    x[0] = mean + sd * normal(rng);
  } else {
    x[0] = params.delta;
  }
  for (std::size_t t = 1; t < n; ++t)
    x[t] = params.eta * x[t - 1] + params.delta + params.sigma * normal(rng);

  // Observed days: uniform subset of exact size round(obs_rate * n).
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(options.obs_rate * n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i + 1));
    std::swap(order[i], order[std::min(j, i)]);
  }
  std::vector<bool> observed(n, false);
  for (std::size_t k = 0; k < m; ++k) observed[order[k]] = true;

  // Outlier-free pre-measurements for every day.
  std::vector<double> clean(n);
  for (std::size_t t = 0; t < n; ++t) clean[t] = x[t] + params.tau * normal(rng);

  if (options.bounds_from_marginal_quantiles) {
    const auto [lo, hi] = *options.bounds_from_marginal_quantiles;
    const OutlierBounds bounds = marginal_outlier_bounds(params, n, options.x1, lo, hi);
    out.params.a = bounds.a;
    out.params.b = bounds.b;
  }

  out.ystar.assign(n, std::nullopt);
  out.outliers.assign(n, std::nullopt);
  for (std::size_t t = 0; t < n; ++t) {
    const bool is_outlier = uniform01(rng) < params.p;
    const double u = uniform01(rng);
    if (!observed[t]) continue;
    out.outliers[t] = is_outlier;
    out.ystar[t] = is_outlier ? out.params.a + u * (out.params.b - out.params.a) : clean[t];
  }

  out.observations = censor(out.ystar, options.ell);
  return out;
}

OutlierBounds marginal_outlier_bounds(const ModelParams& params, std::size_t n, std::optional<double> x1,
                                      double lo_q, double hi_q) {
  if (n == 0) throw ValidationError("marginal bounds: n must be positive");
  if (!(lo_q > 0.0 && lo_q < hi_q && hi_q < 1.0))
    throw ValidationError("marginal bounds: quantile levels must satisfy 0 < lo < hi < 1");
  std::vector<double> mean(n), sd(n);
  double m = 0.0, v = 0.0;
  if (x1) {
    m = *x1;
  } else if (std::abs(params.eta) < 1.0) {
    m = params.delta / (1.0 - params.eta);
    v = params.sigma * params.sigma / (1.0 - params.eta * params.eta);
  } else {
    m = params.delta;
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) {
      m = params.eta * m + params.delta;
      v = params.eta * params.eta * v + params.sigma * params.sigma;
    }
    mean[t] = m;
    sd[t] = std::sqrt(v + params.tau * params.tau);
  }
  double lo = kInf, hi = kNegInf;
  for (std::size_t t = 0; t < n; ++t) {
    lo = std::min(lo, mean[t] - 40.0 * sd[t]);
    hi = std::max(hi, mean[t] + 40.0 * sd[t]);
  }
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw ValidationError("marginal bounds: degenerate pre-measurement law");
  auto cdf = [&](double y) {
    double s = 0.0;
    for (std::size_t t = 0; t < n; ++t) s += std_normal_cdf((y - mean[t]) / sd[t]);
    return s / static_cast<double>(n);
  };
  auto solve = [&](double q) {
    double l = lo, h = hi;
    for (int it = 0; it < 200 && h - l > 1e-13 * (1.0 + std::abs(l) + std::abs(h)); ++it) {
      const double mid = 0.5 * (l + h);
      (cdf(mid) < q ? l : h) = mid;
    }
    return 0.5 * (l + h);
  };
  return {solve(lo_q), solve(hi_q)};
}

SimulationOutput apply_censoring(const SimulationOutput& sim, const CensoringLimits& ell) {
  SimulationOutput out = sim;
  out.observations = censor(sim.ystar, ell);
  return out;
}

}  // namespace scou
