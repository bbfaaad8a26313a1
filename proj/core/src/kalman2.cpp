#include <cmath>
#include <numbers>
#include <numeric>

#include "scou/baselines.hpp"
#include "scou/errors.hpp"
#include "scou/nelder_mead.hpp"

namespace scou {
namespace {

struct FilterPass {
  std::vector<double> pred_mean, pred_var, filt_mean, filt_var;
  double log_likelihood = 0.0;
};

FilterPass filter(const std::vector<std::optional<double>>& values, double sigma, double tau) {
  const std::size_t n = values.size();
  FilterPass f;
  f.pred_mean.resize(n);
  f.pred_var.resize(n);
  f.filt_mean.resize(n);
  f.filt_var.resize(n);
  const double q = sigma * sigma;
  const double r = tau * tau;
  double a = 0.0;
  double p = kDiffusePriorVariance;
  for (std::size_t t = 0; t < n; ++t) {
    f.pred_mean[t] = a;
    f.pred_var[t] = p;
    if (values[t]) {
      const double s = p + r;
      const double v = *values[t] - a;
      const double gain = p / s;
      a += gain * v;
      p = p * r / s;
      f.log_likelihood += -0.5 * (std::log(2.0 * std::numbers::pi * s) + v * v / s);
    }
    f.filt_mean[t] = a;
    f.filt_var[t] = p;
    p += q;
  }
  return f;
}

}  // namespace

double local_level_log_likelihood(const std::vector<std::optional<double>>& values, double sigma, double tau) {
  return filter(values, sigma, tau).log_likelihood;
}

LocalLevelResult local_level_smoother(const std::vector<std::optional<double>>& values, double sigma,
                                      double tau) {
  if (values.empty()) throw ValidationError("local-level smoother needs a non-empty series");
  if (!(sigma >= 0.0) || !(tau >= 0.0)) throw ValidationError("local-level variances must be non-negative");
  const FilterPass f = filter(values, sigma, tau);
  const std::size_t n = values.size();
  LocalLevelResult out;
  out.sigma = sigma;
  out.tau = tau;
  out.log_likelihood = f.log_likelihood;
  out.mean = f.filt_mean;
  out.variance = f.filt_var;
  for (std::size_t t = n - 1; t-- > 0;) {
    const double pred_var = f.pred_var[t + 1];
    const double gain = pred_var > 0.0 ? f.filt_var[t] / pred_var : 0.0;
    out.mean[t] = f.filt_mean[t] + gain * (out.mean[t + 1] - f.pred_mean[t + 1]);
    out.variance[t] = f.filt_var[t] + gain * gain * (out.variance[t + 1] - pred_var);
    if (out.variance[t] < 0.0) out.variance[t] = 0.0;
  }
  return out;
}

LocalLevelResult kalman2_smooth(const ObservationSeries& obs, bool imputed) {
  obs.validate();
  if (obs.observed_count() < 3) throw ValidationError("kalman2 needs at least three observations");
  const ImputedSeries series = imputed ? impute_censored(obs) : raw_values(obs);
  const auto& values = series.values;

  std::vector<double> ys;
  for (const auto& v : values)
    if (v) ys.push_back(*v);
  const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double ss = 0.0;
  for (double y : ys) ss += (y - mean) * (y - mean);
  double sd = std::sqrt(ss / static_cast<double>(ys.size() - 1));
  if (!(sd > 0.0)) sd = 1.0;

  auto nll = [&](const std::vector<double>& z) {
    return -local_level_log_likelihood(values, std::exp(z[0]), std::exp(z[1]));
  };
  NelderMeadOptions opt;
  opt.rel_tol = 1e-12;
  opt.max_evals = 2000;
  const double start = std::log(0.5 * sd);
  auto run = nelder_mead(nll, {start, start}, {0.5, 0.5}, opt);
  for (int restart = 0; restart < 2; ++restart) {
    auto next = nelder_mead(nll, run.x, {0.2, 0.2}, opt);
    if (next.value <= run.value) run = next;
  }
  if (!std::isfinite(run.value)) throw NumericalError("kalman2: non-finite likelihood");

  LocalLevelResult out = local_level_smoother(values, std::exp(run.x[0]), std::exp(run.x[1]));
  out.converged = run.converged;
  return out;
}

}  // namespace scou
