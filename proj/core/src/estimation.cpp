#include "scou/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scou/nelder_mead.hpp"
#include "scou/rng.hpp"

namespace scou {
namespace {

double logit(double p) { return std::log(p) - std::log1p(-p); }
double inv_logit(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

constexpr double kMinFreeP = 1e-6;

std::pair<double, double> mean_sd(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return {mean, sd};
}

OutlierBounds resolve_bounds(const ObservationSeries& obs, const FitConfig& cfg) {
  if (cfg.bounds) {
    if (!(cfg.bounds->a < cfg.bounds->b)) throw ValidationError("outlier bounds require a < b");
    return *cfg.bounds;
  }
  return default_outlier_bounds(obs, cfg.bounds_lo_q, cfg.bounds_hi_q, cfg.bounds_margin);
}

ModelParams resolve_init(const ObservationSeries& obs, const FitConfig& cfg, const OutlierBounds& bounds) {
  ModelParams init = cfg.init ? *cfg.init : auto_initial_params(obs, bounds);
  init.a = bounds.a;
  init.b = bounds.b;
  for (Param q : kAllParams)
    if (auto v = cfg.fixed.get(q)) set_param(init, q, *v);
  if (!cfg.fixed.is_fixed(Param::p)) init.p = std::clamp(init.p, kMinFreeP, 1.0 - kMinFreeP);
  init.validate();
  return init;
}

// Initial simplex edge lengths in free coordinates.
std::vector<double> initial_steps(const ParamTransform& transform, double y_sd) {
  std::vector<double> steps;
  for (Param q : transform.free_params()) {
    switch (q) {
      case Param::eta: steps.push_back(0.05); break;
      case Param::delta: steps.push_back(0.1 * std::max(y_sd, 1e-3)); break;
      case Param::sigma:
      case Param::tau: steps.push_back(0.5); break;
      case Param::p: steps.push_back(1.0); break;
    }
  }
  return steps;
}

ModelParams jitter(const ModelParams& incumbent, const ParamTransform& transform, Rng& rng) {
  ModelParams out = incumbent;
  for (Param q : transform.free_params()) {
    const double u = 2.0 * uniform01(rng) - 1.0;
    const double v = get_param(incumbent, q);
    double next = std::abs(v) > 1e-8 ? v * (1.0 + 0.1 * u) : v + 0.01 * u;
    if (q == Param::p) next = std::clamp(next, kMinFreeP, 1.0 - kMinFreeP);
    set_param(out, q, next);
  }
  return out;
}

}  // namespace

std::string_view param_name(Param param) {
  switch (param) {
    case Param::eta: return "eta";
    case Param::delta: return "delta";
    case Param::sigma: return "sigma";
    case Param::tau: return "tau";
    case Param::p: return "p";
  }
  return "?";
}

Param parse_param(std::string_view name) {
  for (Param q : kAllParams)
    if (param_name(q) == name) return q;
  throw ValidationError("unknown parameter '" + std::string(name) + "'");
}

double get_param(const ModelParams& m, Param param) {
  switch (param) {
    case Param::eta: return m.eta;
    case Param::delta: return m.delta;
    case Param::sigma: return m.sigma;
    case Param::tau: return m.tau;
    case Param::p: return m.p;
  }
  return 0.0;
}

void set_param(ModelParams& m, Param param, double value) {
  switch (param) {
    case Param::eta: m.eta = value; break;
    case Param::delta: m.delta = value; break;
    case Param::sigma: m.sigma = value; break;
    case Param::tau: m.tau = value; break;
    case Param::p: m.p = value; break;
  }
}

std::optional<double> FixedParams::get(Param param) const {
  switch (param) {
    case Param::eta: return eta;
    case Param::delta: return delta;
    case Param::sigma: return sigma;
    case Param::tau: return tau;
    case Param::p: return p;
  }
  return std::nullopt;
}

void FixedParams::set(Param param, double value) {
  switch (param) {
    case Param::eta: eta = value; break;
    case Param::delta: delta = value; break;
    case Param::sigma: sigma = value; break;
    case Param::tau: tau = value; break;
    case Param::p: p = value; break;
  }
}

ParamTransform::ParamTransform(FixedParams fixed) : fixed_(fixed) {
  for (Param q : kAllParams)
    if (!fixed_.is_fixed(q)) free_.push_back(q);
}

std::vector<double> ParamTransform::to_free(const ModelParams& params) const {
  std::vector<double> z;
  z.reserve(free_.size());
  for (Param q : free_) {
    const double v = get_param(params, q);
    switch (q) {
      case Param::sigma:
      case Param::tau: z.push_back(std::log(v)); break;
      case Param::p: z.push_back(logit(v)); break;
      default: z.push_back(v); break;
    }
  }
  return z;
}

ModelParams ParamTransform::from_free(const std::vector<double>& z, const ModelParams& base) const {
  if (z.size() != free_.size()) throw ValidationError("free-parameter vector has the wrong size");
  ModelParams out = base;
  for (Param q : kAllParams)
    if (auto v = fixed_.get(q)) set_param(out, q, *v);
  for (std::size_t i = 0; i < free_.size(); ++i) {
    const Param q = free_[i];
    switch (q) {
      case Param::sigma:
      case Param::tau: set_param(out, q, std::exp(z[i])); break;
      case Param::p: set_param(out, q, inv_logit(z[i])); break;
      default: set_param(out, q, z[i]); break;
    }
  }
  return out;
}

void FitConfig::validate() const {
  if (restarts < 1) throw ValidationError("fit: restarts must be >= 1");
  if (max_evals < 100) throw ValidationError("fit: max_evals must be >= 100");
  if (!(tol > 0.0)) throw ValidationError("fit: tol must be positive");
  if (grid.d && *grid.d < 2) throw ValidationError("fit: grid needs at least two points");
  if (grid.step && !(*grid.step > 0.0)) throw ValidationError("fit: grid step must be positive");
  if (fixed.sigma && !(*fixed.sigma > 0.0)) throw ValidationError("fit: fixed sigma must be positive");
  if (fixed.tau && !(*fixed.tau > 0.0)) throw ValidationError("fit: fixed tau must be positive");
  if (fixed.p && !(*fixed.p >= 0.0 && *fixed.p <= 1.0)) throw ValidationError("fit: fixed p must lie in [0, 1]");
}

ModelParams auto_initial_params(const ObservationSeries& obs, const OutlierBounds& bounds) {
  const auto values = obs.observed_values();
  if (values.empty()) throw ValidationError("no observed values");
  auto [mean, sd] = mean_sd(values);
  if (!(sd > 0.0)) sd = 0.25 * (bounds.b - bounds.a);
  ModelParams init;
  init.eta = 0.95;
  init.delta = mean * (1.0 - init.eta);
  init.sigma = 0.5 * sd;
  init.tau = 0.5 * sd;
  init.p = 0.05;
  init.a = bounds.a;
  init.b = bounds.b;
  return init;
}

Grid resolve_fit_grid(const ObservationSeries& obs, const FitConfig& cfg) {
  const OutlierBounds bounds = resolve_bounds(obs, cfg);
  if (cfg.grid.d) return Grid::uniform(bounds.a, bounds.b, *cfg.grid.d);
  if (cfg.grid.step) return Grid::with_step(bounds.a, bounds.b, *cfg.grid.step);
  const ModelParams init = resolve_init(obs, cfg, bounds);
  return Grid::with_default_resolution(bounds.a, bounds.b, init.sigma, init.tau);
}

double log_likelihood_at(const ObservationSeries& obs, const ModelParams& params, const Grid& grid) {
  return log_likelihood(build_emissions(obs, params, grid), build_transition(params, grid));
}

FitResult fit(const ObservationSeries& obs, const FitConfig& cfg) {
  cfg.validate();
  obs.validate();
  if (obs.observed_count() < kMinObservationsForFit)
    throw ValidationError("fit needs at least " + std::to_string(kMinObservationsForFit) +
                          " observed values, got " + std::to_string(obs.observed_count()));

  const OutlierBounds bounds = resolve_bounds(obs, cfg);
  const ModelParams init = resolve_init(obs, cfg, bounds);
  const Grid grid = resolve_fit_grid(obs, cfg);
  const ParamTransform transform(cfg.fixed);

  FitResult result;
  result.grid = grid;
  result.params = init;
  result.log_likelihood = kNegInf;

  if (transform.dimension() == 0) {
    result.log_likelihood = log_likelihood_at(obs, init, grid);
    result.converged = std::isfinite(result.log_likelihood);
    result.evals_used = 1;
    result.restart_scores = {result.log_likelihood};
    if (!result.converged) throw FitError("log-likelihood is not finite at the fixed parameters", result);
    return result;
  }

  auto objective = [&](const std::vector<double>& z) {
    const ModelParams m = transform.from_free(z, init);
    if (!(m.sigma > 0.0) || !(m.tau > 0.0) || !std::isfinite(m.sigma) || !std::isfinite(m.tau))
      return kInf;
    double ll = log_likelihood_at(obs, m, grid);
    if (cfg.eta_barrier && m.eta > 1.05) {
      if (m.eta >= 1.1) return kInf;
      ll += std::log((1.1 - m.eta) / 0.05);
    }
    return -ll;
  };

  const auto steps = initial_steps(transform, mean_sd(obs.observed_values()).second);
  NelderMeadOptions nm;
  nm.rel_tol = cfg.tol;
  nm.max_evals = cfg.max_evals;

  Rng rng{splitmix64(cfg.seed)};
  ModelParams start = init;
  bool best_converged = false;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    if (r > 0) start = jitter(result.params, transform, rng);
    const auto run = nelder_mead(objective, transform.to_free(start), steps, nm);
    result.evals_used += run.evals;
    const double ll = -run.value;
    result.restart_scores.push_back(ll);
    if (std::isfinite(ll) && ll > result.log_likelihood) {
      result.log_likelihood = ll;
      result.params = transform.from_free(run.x, init);
      best_converged = run.converged;
    }
  }
  result.converged = best_converged;
  if (!std::isfinite(result.log_likelihood))
    throw FitError("every restart produced a non-finite log-likelihood", result);
  return result;
}

std::vector<ProfilePoint> profile_likelihood(const ObservationSeries& obs, const FitConfig& cfg,
                                             Param param, const std::vector<double>& values) {
  std::vector<ProfilePoint> out;
  out.reserve(values.size());
  std::optional<ModelParams> warm = cfg.init;
  for (double v : values) {
    ProfilePoint point;
    point.value = v;
    FitConfig local = cfg;
    local.fixed.set(param, v);
    local.init = warm;
    // A fixed grid keeps the profiled likelihoods comparable.
    if (!local.grid.d && !local.grid.step) local.grid.d = resolve_fit_grid(obs, cfg).d;
    try {
      const FitResult r = fit(obs, local);
      point.log_likelihood = r.log_likelihood;
      point.params = r.params;
      warm = r.params;
    } catch (const FitError& e) {
      point.error = e.what();
    } catch (const ValidationError& e) {
      point.error = e.what();
    }
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace scou
