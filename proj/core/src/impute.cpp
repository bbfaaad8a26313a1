#include <algorithm>
#include <cmath>
#include <numeric>

#include "scou/baselines.hpp"
#include "scou/errors.hpp"
#include "scou/gaussian.hpp"
#include "scou/nelder_mead.hpp"

namespace scou {

double truncated_normal_upper_mean(double mu, double sigma, double ell) {
  const double alpha = (ell - mu) / sigma;
  return std::min(mu - sigma * inverse_mills_ratio(alpha), ell);
}

CensoredNormalFit fit_censored_normal(const ObservationSeries& obs) {
  std::vector<double> exact, limits;
  for (const auto& o : obs.entries()) {
    if (!o.y) continue;
    (o.censored ? limits : exact).push_back(*o.y);
  }
  if (exact.empty()) throw ValidationError("censored-normal fit needs at least one uncensored value");

  std::vector<double> all = exact;
  all.insert(all.end(), limits.begin(), limits.end());
  const double mean = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
  double ss = 0.0;
  for (double v : all) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / static_cast<double>(all.size()));
  if (!(sd > 0.0)) sd = 1.0;

  auto nll = [&](const std::vector<double>& z) {
    const double mu = z[0];
    const double sigma = std::exp(z[1]);
    double ll = 0.0;
    for (double y : exact) ll += normal_logpdf(y, mu, sigma);
    for (double l : limits) ll += normal_logcdf(l, mu, sigma);
    return -ll;
  };

  NelderMeadOptions opt;
  opt.rel_tol = 1e-12;
  opt.max_evals = 4000;
  auto run = nelder_mead(nll, {mean, std::log(sd)}, {0.5 * sd, 0.5}, opt);
  run = nelder_mead(nll, run.x, {0.1 * sd, 0.1}, opt);
  return {run.x[0], std::exp(run.x[1]), -run.value};
}

ImputedSeries raw_values(const ObservationSeries& obs) {
  ImputedSeries out;
  out.values.resize(obs.size());
  out.imputed.assign(obs.size(), false);
  for (std::size_t i = 0; i < obs.size(); ++i) out.values[i] = obs[i].y;
  return out;
}

ImputedSeries impute_censored(const ObservationSeries& obs, std::optional<double> floor) {
  ImputedSeries out = raw_values(obs);
  if (obs.censored_count() == 0) return out;

  const CensoredNormalFit f = fit_censored_normal(obs);
  out.mu = f.mu;
  out.sigma = f.sigma;

  if (!floor) {
    const auto v = obs.observed_values();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    floor = *lo - std::max(*hi - *lo, 1.0);
  }

  const bool degenerate = !(f.sigma > 1e-10 * (1.0 + std::abs(f.mu)));
  if (degenerate) out.warnings.push_back("censored-normal fit is degenerate (sigma ~ 0); imputing at the limit");

  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Observation& o = obs[i];
    if (!o.y || !o.censored) continue;
    double v = degenerate ? o.ell : truncated_normal_upper_mean(f.mu, f.sigma, o.ell);
    v = std::min(std::max(v, *floor), o.ell);
    out.values[i] = v;
    out.imputed[i] = true;
  }
  return out;
}

}  // namespace scou
