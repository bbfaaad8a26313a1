#include "scou/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scou/errors.hpp"

namespace scou {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

void validate_common(const ModelParams& m) {
  require(std::isfinite(m.eta) && std::isfinite(m.delta) && std::isfinite(m.sigma) &&
              std::isfinite(m.tau) && std::isfinite(m.p) && std::isfinite(m.a) &&
              std::isfinite(m.b),
          "model parameters must be finite");
  require(m.p >= 0.0 && m.p <= 1.0, "outlier probability p must lie in [0, 1]");
  require(m.a < m.b, "outlier support requires a < b");
}

}  // namespace

void ModelParams::validate() const {
  validate_common(*this);
  require(sigma > 0.0, "sigma must be positive");
  require(tau > 0.0, "tau must be positive");
}

void ModelParams::validate_for_simulation() const {
  validate_common(*this);
  require(sigma >= 0.0, "sigma must be non-negative");
  require(tau >= 0.0, "tau must be non-negative");
}

ObservationSeries::ObservationSeries(std::vector<Observation> entries)
    : entries_(std::move(entries)) {
  validate();
}

ObservationSeries ObservationSeries::from_measurements(std::span<const std::optional<double>> values,
                                                       std::span<const double> ell) {
  require(ell.size() == 1 || ell.size() == values.size(),
          "censoring limits must be constant or given per day");
  std::vector<Observation> entries(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    Observation& o = entries[i];
    o.t = static_cast<int>(i + 1);
    o.ell = ell.size() == 1 ? ell[0] : ell[i];
    if (values[i]) {
      if (*values[i] <= o.ell) {
        o.y = o.ell;
        o.censored = true;
      } else {
        o.y = values[i];
      }
    }
  }
  return ObservationSeries(std::move(entries));
}

std::size_t ObservationSeries::observed_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const Observation& o) { return o.y.has_value(); }));
}

std::size_t ObservationSeries::censored_count() const {
  return static_cast<std::size_t>(std::count_if(
      entries_.begin(), entries_.end(), [](const Observation& o) { return o.y && o.censored; }));
}

std::vector<double> ObservationSeries::observed_values() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const auto& o : entries_)
    if (o.y) out.push_back(*o.y);
  return out;
}

ObservationSeries ObservationSeries::truncated(std::size_t length) const {
  require(length <= entries_.size(), "truncation length exceeds series length");
  return ObservationSeries(std::vector<Observation>(entries_.begin(), entries_.begin() + length));
}

ObservationSeries ObservationSeries::without_observation(std::size_t t) const {
  require(t >= 1 && t <= entries_.size(), "day index out of range");
  auto copy = entries_;
  copy[t - 1].y.reset();
  copy[t - 1].censored = false;
  return ObservationSeries(std::move(copy));
}

void ObservationSeries::validate() const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Observation& o = entries_[i];
    const std::string where = "day " + std::to_string(i + 1);
    require(o.t == static_cast<int>(i + 1), where + ": entries must be sorted with one per day");
    require(!std::isnan(o.ell) && o.ell != kInf, where + ": censoring limit must be < +inf");
    if (o.y) {
      require(std::isfinite(*o.y), where + ": value must be finite");
      if (o.censored) {
        require(*o.y == o.ell, where + ": censored value must equal its limit");
      } else {
        require(*o.y > o.ell, where + ": uncensored value must exceed its limit");
      }
    } else {
      require(!o.censored, where + ": censored flag set on an unobserved day");
    }
  }
}

double empirical_quantile(std::span<const double> values, double q) {
  require(!values.empty(), "quantile of an empty sample");
  require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(sorted.size() - 1)));
  return sorted[idx];
}

double censor_limit_for_rate(std::span<const double> ystar_values, double target_rate) {
  require(!ystar_values.empty(), "censor_limit_for_rate: empty input");
  require(target_rate > 0.0 && target_rate < 1.0, "censoring rate must lie in (0, 1)");
  return empirical_quantile(ystar_values, target_rate);
}

OutlierBounds default_outlier_bounds(const ObservationSeries& observations, double lo_q,
                                     double hi_q, double margin) {
  require(lo_q >= 0.0 && lo_q < hi_q && hi_q <= 1.0, "bounds quantiles need 0 <= lo < hi <= 1");
  require(margin >= 0.0, "bounds margin must be non-negative");
  const auto values = observations.observed_values();
  require(values.size() >= 2, "outlier bounds need at least two observed values");
  require(observations.censored_count() < values.size(),
          "outlier bounds undefined: every observation is censored");
  OutlierBounds bounds{empirical_quantile(values, lo_q), empirical_quantile(values, hi_q)};
  if (bounds.a == bounds.b) {
    require(margin > 0.0, "observed values have zero spread; set a positive bounds margin");
    bounds.a -= margin;
    bounds.b += margin;
  }
  return bounds;
}

}  // namespace scou
