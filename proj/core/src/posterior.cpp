#include "scou/posterior.hpp"

#include <algorithm>
#include <cmath>

#include "scou/errors.hpp"
#include "scou/gaussian.hpp"
#include "scou/rng.hpp"

namespace scou {
namespace {

double lse(const Eigen::RowVectorXd& v) {
  return log_sum_exp(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

// log sum_x exp(log_f(t-1, x)) pi(x, .), or the uniform prior for t = 0.
Eigen::RowVectorXd log_predictive(const FBTables& fb, const TransitionMatrix& pi, Eigen::Index t) {
  const auto d = fb.log_f.cols();
  Eigen::RowVectorXd out(d);
  if (t == 0) {
    out.setConstant(-std::log(static_cast<double>(d)));
    return out;
  }
  std::vector<double> buf(static_cast<std::size_t>(d));
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) buf[r] = fb.log_f(t - 1, r) + pi.log_prob()(r, c);
    out[c] = log_sum_exp(buf);
  }
  return out;
}

std::size_t draw(const Eigen::RowVectorXd& log_w, Rng& rng, Eigen::RowVectorXd& scratch) {
  const double hi = log_w.maxCoeff();
  scratch = (log_w.array() - hi).exp().matrix();
  const double target = uniform01(rng) * scratch.sum();
  double acc = 0.0;
  const auto d = scratch.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    acc += scratch[i];
    if (target < acc) return static_cast<std::size_t>(i);
  }
  for (Eigen::Index i = d - 1; i >= 0; --i)
    if (scratch[i] > 0.0) return static_cast<std::size_t>(i);
  return 0;
}

}  // namespace

RowMatrix smoothed_marginals(const FBTables& fb) {
  RowMatrix g(fb.log_f.rows(), fb.log_f.cols());
  Eigen::RowVectorXd row;
  for (Eigen::Index t = 0; t < g.rows(); ++t) {
    row = fb.log_f.row(t) + fb.log_b.row(t);
    const double norm = lse(row);
    if (!std::isfinite(norm)) throw NumericalError("smoothed marginal has no finite mass");
    g.row(t) = (row.array() - norm).exp().matrix();
    g.row(t) /= g.row(t).sum();
  }
  return g;
}

RowMatrix pairwise_marginal(const FBTables& fb, const EmissionTable& emissions,
                            const TransitionMatrix& pi, std::size_t t) {
  if (t < 2 || t > static_cast<std::size_t>(fb.log_f.rows()))
    throw ValidationError("pairwise marginal needs 2 <= t <= n");
  const auto cur = static_cast<Eigen::Index>(t - 1);
  const auto d = fb.log_f.cols();
  RowMatrix log_xi(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c)
      log_xi(r, c) = fb.log_f(cur - 1, r) + pi.log_prob()(r, c) + emissions.log_values()(cur, c) +
                     fb.log_b(cur, c);
  const double norm = log_sum_exp(std::span<const double>(log_xi.data(), static_cast<std::size_t>(d * d)));
  RowMatrix xi = (log_xi.array() - norm).exp().matrix();
  xi /= xi.sum();
  return xi;
}

double discrete_quantile(const Eigen::RowVectorXd& probs, const std::vector<double>& values, double level) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (acc >= level) return values[static_cast<std::size_t>(i)];
  }
  return values.back();
}

PosteriorSummary summarize(const FBTables& fb, const Grid& grid, double coverage, bool keep_marginals) {
  if (!(coverage > 0.0 && coverage < 1.0)) throw ValidationError("coverage must lie in (0, 1)");
  if (static_cast<std::size_t>(fb.log_f.cols()) != grid.d)
    throw ValidationError("tables and grid disagree on the state count");
  RowMatrix g = smoothed_marginals(fb);
  const Eigen::Map<const Eigen::RowVectorXd> x(grid.values.data(), static_cast<Eigen::Index>(grid.d));
  const auto n = static_cast<std::size_t>(g.rows());

  PosteriorSummary s;
  s.coverage = coverage;
  s.log_likelihood = fb.log_likelihood;
  s.mean.resize(n);
  s.sd.resize(n);
  s.lower.resize(n);
  s.upper.resize(n);
  const double lo_level = 0.5 * (1.0 - coverage);
  const double hi_level = 0.5 * (1.0 + coverage);
  for (std::size_t t = 0; t < n; ++t) {
    const Eigen::RowVectorXd row = g.row(static_cast<Eigen::Index>(t));
    const double mean = row.dot(x);
    const double var = row.dot((x.array() - mean).square().matrix());
    s.mean[t] = mean;
    s.sd[t] = std::sqrt(std::max(var, 0.0));
    s.lower[t] = discrete_quantile(row, grid.values, lo_level);
    s.upper[t] = discrete_quantile(row, grid.values, hi_level);
  }
  if (keep_marginals) s.marginals = std::move(g);
  return s;
}

PosteriorSummary smooth(const ObservationSeries& obs, const ModelParams& params, const Grid& grid,
                        double coverage, bool keep_marginals) {
  const auto e = build_emissions(obs, params, grid);
  const auto pi = build_transition(params, grid);
  return summarize(forward_backward(e, pi), grid, coverage, keep_marginals);
}

std::vector<LatentPath> sample_paths(const FBTables& fb, const EmissionTable& emissions,
                                     const TransitionMatrix& pi, const Grid& grid, std::size_t n_paths,
                                     std::uint64_t seed) {
  if (n_paths < 1) throw ValidationError("sample_paths: n_paths must be >= 1");
  const auto n = fb.log_f.rows();
  const auto d = fb.log_f.cols();
  if (static_cast<std::size_t>(d) != grid.d) throw ValidationError("tables and grid disagree on the state count");

  // log e_t + log B_t, shared by every transition into day t.
  const RowMatrix tail = emissions.log_values() + fb.log_b;
  const Eigen::RowVectorXd first = fb.log_f.row(0) + fb.log_b.row(0);

  std::vector<LatentPath> paths(n_paths);
  Eigen::RowVectorXd log_w(d), scratch(d);
  for (std::size_t k = 0; k < n_paths; ++k) {
    Rng rng = make_stream(seed, k);
    auto& x = paths[k].x;
    x.resize(static_cast<std::size_t>(n));
    std::size_t state = draw(first, rng, scratch);
    x[0] = grid.values[state];
    for (Eigen::Index t = 1; t < n; ++t) {
      log_w = pi.log_prob().row(static_cast<Eigen::Index>(state)) + tail.row(t);
      state = draw(log_w, rng, scratch);
      x[static_cast<std::size_t>(t)] = grid.values[state];
    }
  }
  return paths;
}

std::vector<LatentPath> sample_paths(const ObservationSeries& obs, const ModelParams& params,
                                     const Grid& grid, std::size_t n_paths, std::uint64_t seed) {
  const auto e = build_emissions(obs, params, grid);
  const auto pi = build_transition(params, grid);
  return sample_paths(forward_backward(e, pi), e, pi, grid, n_paths, seed);
}

std::size_t OutlierReport::flagged_count() const {
  return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), true));
}

OutlierReport outlier_probabilities(const ObservationSeries& obs, const ModelParams& params,
                                    const Grid& grid) {
  const auto e = build_emissions(obs, params, grid);
  const auto pi = build_transition(params, grid);
  const FBTables fb = forward_backward(e, pi);

  OutlierReport report;
  report.probability.assign(obs.size(), std::nullopt);
  report.flagged.assign(obs.size(), false);
  const double width = params.b - params.a;
  const double log_p = std::log(params.p);

  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Observation& o = obs[i];
    if (!o.y) continue;
    if (params.p == 0.0) {
      report.probability[i] = 0.0;
      continue;
    }
    if (params.p == 1.0) {
      report.probability[i] = 1.0;
      continue;
    }
    const auto t = static_cast<Eigen::Index>(i);
    const double mass = o.censored ? std::clamp((o.ell - params.a) / width, 0.0, 1.0) : 1.0 / width;
    const Eigen::RowVectorXd pred = log_predictive(fb, pi, t);
    const double num = log_p + std::log(mass) + lse(pred + fb.log_b.row(t));
    const double den = lse(pred + e.log_values().row(t) + fb.log_b.row(t));
    report.probability[i] = std::clamp(std::exp(num - den), 0.0, 1.0);
  }
  return detect_outliers(std::move(report), kDefaultOutlierThreshold);
}

OutlierReport detect_outliers(OutlierReport report, double h) {
  if (!(h > 0.0 && h < 1.0)) throw ValidationError("outlier threshold h must lie in (0, 1)");
  report.threshold = h;
  report.flagged.assign(report.probability.size(), false);
  for (std::size_t i = 0; i < report.probability.size(); ++i)
    report.flagged[i] = report.probability[i] && *report.probability[i] > h;
  return report;
}

}  // namespace scou
