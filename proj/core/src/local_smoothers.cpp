#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "scou/baselines.hpp"
#include "scou/errors.hpp"

namespace scou {
namespace {

struct Points {
  std::vector<double> day;
  std::vector<double> value;
};

Points collect(const std::vector<std::optional<double>>& values, std::optional<std::size_t> skip = {}) {
  Points pts;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i] || (skip && *skip == i)) continue;
    pts.day.push_back(static_cast<double>(i));
    pts.value.push_back(*values[i]);
  }
  return pts;
}

std::optional<double> window_mean(const Points& pts, double target, int half) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < pts.day.size(); ++k) {
    if (std::abs(pts.day[k] - target) <= half) {
      sum += pts.value[k];
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

struct LocalFit {
  std::optional<double> value;
  bool fell_back = false;
};

std::size_t neighborhood_size(std::size_t m, double span) {
  return std::min(m, static_cast<std::size_t>(std::floor(span * static_cast<double>(m) + 1e-9)));
}

LocalFit local_regression(const Points& pts, double target, double span, int degree) {
  LocalFit out;
  const std::size_t m = pts.day.size();
  const std::size_t q = neighborhood_size(m, span);
  if (q == 0) return out;

  std::vector<double> dist(m);
  for (std::size_t k = 0; k < m; ++k) dist[k] = std::abs(pts.day[k] - target);
  std::vector<double> sorted = dist;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(q - 1), sorted.end());
  // Half a day past the q-th distance: every point of the neighbourhood, ties included, gets positive weight.
  const double h = sorted[q - 1] + 0.5;

  std::vector<double> w(m, 0.0);
  double wsum = 0.0, wy = 0.0;
  std::size_t active = 0;
  for (std::size_t k = 0; k < m; ++k) {
    if (dist[k] < h) {
      const double u = dist[k] / h;
      const double c = 1.0 - u * u * u;
      w[k] = c * c * c;
      ++active;
      wsum += w[k];
      wy += w[k] * pts.value[k];
    }
  }

  const auto cols = static_cast<Eigen::Index>(degree + 1);
  if (active >= static_cast<std::size_t>(cols)) {
    Eigen::MatrixXd design(static_cast<Eigen::Index>(active), cols);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(active));
    Eigen::Index row = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (w[k] <= 0.0) continue;
      const double sw = std::sqrt(w[k]);
      const double u = (pts.day[k] - target) / h;
      double pw = 1.0;
      for (Eigen::Index c = 0; c < cols; ++c) {
        design(row, c) = sw * pw;
        pw *= u;
      }
      rhs[row] = sw * pts.value[k];
      ++row;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() == cols) {
      out.value = qr.solve(rhs)[0];
      return out;
    }
  }
  out.value = wy / wsum;
  out.fell_back = true;
  return out;
}

void check_window(int window_days) {
  if (window_days < 1 || window_days % 2 == 0)
    throw ValidationError("moving-average window must be a positive odd number of days");
}

void check_loess(double span, int degree) {
  if (!(span > 0.0 && span <= 1.0)) throw ValidationError("LOESS span must lie in (0, 1]");
  if (degree != 1 && degree != 2) throw ValidationError("LOESS degree must be 1 or 2");
}

}  // namespace

std::vector<std::optional<double>> moving_average(const std::vector<std::optional<double>>& values,
                                                  int window_days) {
  check_window(window_days);
  const Points pts = collect(values);
  std::vector<std::optional<double>> out(values.size());
  for (std::size_t t = 0; t < values.size(); ++t)
    out[t] = window_mean(pts, static_cast<double>(t), window_days / 2);
  return out;
}

std::vector<std::optional<double>> loess_smooth(const std::vector<std::optional<double>>& values, double span,
                                                int degree, std::vector<std::string>* warnings) {
  check_loess(span, degree);
  const Points pts = collect(values);
  if (neighborhood_size(pts.day.size(), span) < static_cast<std::size_t>(degree + 1))
    throw ValidationError("LOESS neighbourhood smaller than degree + 1 points");
  std::vector<std::optional<double>> out(values.size());
  std::size_t fallbacks = 0;
  for (std::size_t t = 0; t < values.size(); ++t) {
    const LocalFit f = local_regression(pts, static_cast<double>(t), span, degree);
    out[t] = f.value;
    fallbacks += f.fell_back ? 1 : 0;
  }
  if (fallbacks > 0 && warnings)
    warnings->push_back("LOESS fell back to a local weighted mean on " + std::to_string(fallbacks) + " day(s)");
  return out;
}

std::vector<double> default_window_candidates() {
  std::vector<double> out;
  for (int w = 3; w <= 41; w += 2) out.push_back(w);
  return out;
}

std::vector<double> default_span_candidates() {
  std::vector<double> out;
  for (int k = 10; k <= 90; k += 2) out.push_back(k / 100.0);
  return out;
}

LooCvResult loo_cv_select(const std::vector<std::optional<double>>& values, BaselineMethod method,
                          const std::vector<double>& candidates, int loess_degree) {
  if (candidates.empty()) throw ValidationError("loo_cv_select: empty candidate set");
  if (method == BaselineMethod::kalman2) throw ValidationError("loo_cv_select: kalman2 has no tuning parameter");
  std::vector<std::size_t> observed;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i]) observed.push_back(i);
  if (observed.size() < 5) throw ValidationError("loo_cv_select needs at least five observed points");

  LooCvResult result;
  for (double c : candidates) {
    CandidateScore score{c, std::nullopt};
    bool feasible = true;
    if (method == BaselineMethod::moving_average) {
      const int w = static_cast<int>(std::lround(c));
      feasible = w >= 1 && w % 2 == 1;
    } else {
      feasible = c > 0.0 && c <= 1.0 &&
                 neighborhood_size(observed.size() - 1, c) >= static_cast<std::size_t>(loess_degree + 1);
    }
    double sse = 0.0;
    for (std::size_t i = 0; feasible && i < observed.size(); ++i) {
      const std::size_t day = observed[i];
      const Points pts = collect(values, day);
      const std::optional<double> pred =
          method == BaselineMethod::moving_average
              ? window_mean(pts, static_cast<double>(day), static_cast<int>(std::lround(c)) / 2)
              : local_regression(pts, static_cast<double>(day), c, loess_degree).value;
      if (!pred) {
        feasible = false;
        break;
      }
      const double err = *pred - *values[day];
      sse += err * err;
    }
    if (feasible) score.rmse = std::sqrt(sse / static_cast<double>(observed.size()));
    result.table.push_back(score);
  }

  // Scores equal up to round-off count as ties.
  double scale = 0.0;
  for (std::size_t day : observed) scale = std::max(scale, std::abs(*values[day]));
  const double abs_tol = 1e-12 * (1.0 + scale);
  const CandidateScore* best = nullptr;
  for (const auto& s : result.table) {
    if (!s.rmse) continue;
    if (!best) {
      best = &s;
      continue;
    }
    const double tol = abs_tol + 1e-10 * std::max(*s.rmse, *best->rmse);
    if (*s.rmse < *best->rmse - tol || (std::abs(*s.rmse - *best->rmse) <= tol && s.candidate > best->candidate))
      best = &s;
  }
  if (!best) throw ValidationError("loo_cv_select: no feasible candidate");
  result.chosen = best->candidate;
  return result;
}

void BaselineConfig::validate() const {
  if (method == BaselineMethod::moving_average && selection == Selection::fixed) check_window(window_days);
  if (method == BaselineMethod::loess) {
    if (loess_degree != 1 && loess_degree != 2) throw ValidationError("LOESS degree must be 1 or 2");
    if (selection == Selection::fixed) check_loess(span, loess_degree);
  }
}

BaselineOutput run_baseline(const ObservationSeries& obs, const BaselineConfig& cfg) {
  cfg.validate();
  BaselineOutput out;
  if (cfg.method == BaselineMethod::kalman2) {
    const auto k = kalman2_smooth(obs, false);
    out.mean.assign(k.mean.begin(), k.mean.end());
    out.variance = k.variance;
    return out;
  }
  const ImputedSeries series = impute_censored(obs);
  const bool ma = cfg.method == BaselineMethod::moving_average;
  if (cfg.selection == BaselineConfig::Selection::loo_cv) {
    const auto candidates =
        !cfg.candidates.empty() ? cfg.candidates : (ma ? default_window_candidates() : default_span_candidates());
    out.chosen = loo_cv_select(series.values, cfg.method, candidates, cfg.loess_degree).chosen;
  } else {
    out.chosen = ma ? cfg.window_days : cfg.span;
  }
  out.mean = ma ? moving_average(series.values, static_cast<int>(std::lround(out.chosen)))
                : loess_smooth(series.values, out.chosen, cfg.loess_degree);
  return out;
}

}  // namespace scou
