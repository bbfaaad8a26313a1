#include "scou/grid_hmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "scou/errors.hpp"
#include "scou/gaussian.hpp"

namespace scou {
namespace {

// Below this, a rescaled step is redone in the log domain.
constexpr double kTinySum = 1e-250;

void check_dims(const EmissionTable& e, const TransitionMatrix& pi) {
  if (e.steps() == 0) throw ValidationError("emission table has no rows");
  if (e.states() != pi.size())
    throw ValidationError("emission table and transition matrix disagree on the state count");
}

// lse_x(prev(x) + log_pi(x, col)) + tail(col), for every column.
void log_forward_row(const RowMatrix& log_pi, const Eigen::RowVectorXd& prev,
                     const Eigen::RowVectorXd& tail, Eigen::RowVectorXd& out) {
  const Eigen::Index d = log_pi.rows();
  std::vector<double> buf(static_cast<std::size_t>(d));
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) buf[r] = prev[r] + log_pi(r, c);
    out[c] = log_sum_exp(buf) + tail[c];
  }
}

// lse_x'(log_pi(row, x') + next(x')), for every row.
void log_backward_row(const RowMatrix& log_pi, const Eigen::RowVectorXd& next,
                      Eigen::RowVectorXd& out) {
  const Eigen::Index d = log_pi.rows();
  std::vector<double> buf(static_cast<std::size_t>(d));
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) buf[c] = log_pi(r, c) + next[c];
    out[r] = log_sum_exp(buf);
  }
}

double row_lse(const Eigen::RowVectorXd& row) {
  return log_sum_exp(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
}

}  // namespace

Grid Grid::uniform(double a, double b, std::size_t d) {
  if (!(std::isfinite(a) && std::isfinite(b) && a < b)) throw ValidationError("grid requires finite a < b");
  if (d < 2) throw ValidationError("grid requires at least two points");
  Grid g;
  g.a = a;
  g.b = b;
  g.d = d;
  g.step = (b - a) / static_cast<double>(d - 1);
  g.values.resize(d);
  for (std::size_t i = 0; i < d; ++i) g.values[i] = a + g.step * static_cast<double>(i);
  g.values.back() = b;
  return g;
}

Grid Grid::with_step(double a, double b, double target_step) {
  if (!(target_step > 0.0)) throw ValidationError("grid step must be positive");
  const double cells = std::ceil((b - a) / target_step - 1e-9);
  return uniform(a, b, static_cast<std::size_t>(std::max(1.0, cells)) + 1);
}

Grid Grid::with_default_resolution(double a, double b, double sigma, double tau) {
  const double target = 0.1 * std::min(sigma, tau);
  if (!(target > 0.0)) throw ValidationError("default grid needs positive sigma and tau");
  const double cells = std::ceil((b - a) / target);
  const auto d = static_cast<std::size_t>(std::clamp(cells + 1.0, 201.0, 2000.0));
  return uniform(a, b, d);
}

TransitionMatrix TransitionMatrix::from_probabilities(RowMatrix prob) {
  if (prob.rows() != prob.cols() || prob.rows() < 1)
    throw ValidationError("transition matrix must be square and non-empty");
  for (Eigen::Index r = 0; r < prob.rows(); ++r) {
    if ((prob.row(r).array() < 0.0).any() || !prob.row(r).allFinite())
      throw ValidationError("transition probabilities must be finite and non-negative");
    if (std::abs(prob.row(r).sum() - 1.0) > 1e-12)
      throw ValidationError("transition row " + std::to_string(r) + " does not sum to one");
  }
  TransitionMatrix m;
  m.log_prob_ = prob.array().log().matrix();
  m.prob_ = std::move(prob);
  return m;
}

TransitionMatrix build_transition(const ModelParams& params, const Grid& grid) {
  if (!(params.sigma > 0.0) || !std::isfinite(params.sigma))
    throw ValidationError("transition requires sigma > 0");
  const auto d = static_cast<Eigen::Index>(grid.d);
  TransitionMatrix m;
  m.log_prob_.resize(d, d);
  m.prob_.resize(d, d);
  const double inv_two_var = 0.5 / (params.sigma * params.sigma);
  for (Eigen::Index r = 0; r < d; ++r) {
    const double mean = params.eta * grid.values[r] + params.delta;
    double hi = kNegInf;
    for (Eigen::Index c = 0; c < d; ++c) {
      const double z = grid.values[c] - mean;
      const double v = -z * z * inv_two_var;
      m.log_prob_(r, c) = v;
      hi = std::max(hi, v);
    }
    double sum = 0.0;
    for (Eigen::Index c = 0; c < d; ++c) {
      const double w = std::exp(m.log_prob_(r, c) - hi);
      m.prob_(r, c) = w;
      sum += w;
    }
    const double log_norm = hi + std::log(sum);
    m.log_prob_.row(r).array() -= log_norm;
    m.prob_.row(r) /= sum;
  }
  return m;
}

void EmissionTable::finalize() {
  const auto n = log_.rows();
  scaled_.resize(n, log_.cols());
  row_max_.assign(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double hi = log_.row(t).maxCoeff();
    if (!std::isfinite(hi))
      throw NumericalError("emission row " + std::to_string(t + 1) + " has no finite mass");
    row_max_[t] = hi;
    scaled_.row(t) = (log_.row(t).array() - hi).exp().matrix();
  }
}

EmissionTable EmissionTable::from_values(const RowMatrix& values) {
  if ((values.array() <= 0.0).any() || !values.allFinite())
    throw ValidationError("emission values must be finite and positive");
  return from_log_values(values.array().log().matrix());
}

EmissionTable EmissionTable::from_log_values(RowMatrix log_values) {
  EmissionTable e;
  e.log_ = std::move(log_values);
  e.finalize();
  return e;
}

double EmissionTable::value(std::size_t t, std::size_t x) const {
  return std::exp(log_(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(x)));
}

EmissionTable build_emissions(const ObservationSeries& obs, const ModelParams& params, const Grid& grid) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(obs.size());
  const auto d = static_cast<Eigen::Index>(grid.d);
  EmissionTable e;
  e.log_.setZero(n, d);

  const double width = params.b - params.a;
  const double log_keep = std::log1p(-params.p);
  const double log_p = std::log(params.p);
  const double log_density_norm = -std::log(params.tau) - 0.5 * std::log(2.0 * std::numbers::pi);
  const double log_outlier_uncensored = log_p - std::log(width);
  const double inv_tau = 1.0 / params.tau;

  for (Eigen::Index t = 0; t < n; ++t) {
    const Observation& o = obs[static_cast<std::size_t>(t)];
    if (!o.y) continue;
    if (!o.censored) {
      const double y = *o.y;
      for (Eigen::Index x = 0; x < d; ++x) {
        const double z = (y - grid.values[x]) * inv_tau;
        e.log_(t, x) = log_add_exp(log_keep + log_density_norm - 0.5 * z * z, log_outlier_uncensored);
      }
    } else {
      double mass = (o.ell - params.a) / width;
      if (mass < 0.0) {
        mass = 0.0;
        ++e.clamped_;
      }
      mass = std::min(mass, 1.0);
      const double log_outlier = log_p + std::log(mass);
      for (Eigen::Index x = 0; x < d; ++x) {
        const double z = (o.ell - grid.values[x]) * inv_tau;
        e.log_(t, x) = log_add_exp(log_keep + std_normal_logcdf(z), log_outlier);
      }
    }
  }
  e.finalize();
  return e;
}

ForwardResult forward(const EmissionTable& emissions, const TransitionMatrix& pi) {
  check_dims(emissions, pi);
  const auto n = static_cast<Eigen::Index>(emissions.steps());
  const auto d = static_cast<Eigen::Index>(emissions.states());
  const RowMatrix& P = pi.prob();
  const RowMatrix& E = emissions.scaled();
  const RowMatrix& LE = emissions.log_values();
  const auto& m = emissions.row_log_scale();

  ForwardResult out;
  out.log_f.resize(n, d);
  out.log_f.row(0) = LE.row(0).array() - std::log(static_cast<double>(d));
  double scale = row_lse(out.log_f.row(0));
  Eigen::RowVectorXd alpha = (out.log_f.row(0).array() - scale).exp().matrix();
  Eigen::RowVectorXd w(d), lrow(d);

  for (Eigen::Index t = 1; t < n; ++t) {
    w.noalias() = alpha * P;
    w.array() *= E.row(t).array();
    const double s = w.sum();
    if (s > kTinySum && (w.array() > 0.0).all()) {
      alpha = w / s;
      scale += m[t] + std::log(s);
      out.log_f.row(t) = alpha.array().log() + scale;
    } else {
      log_forward_row(pi.log_prob(), out.log_f.row(t - 1), LE.row(t), lrow);
      scale = row_lse(lrow);
      alpha = (lrow.array() - scale).exp().matrix();
      out.log_f.row(t) = lrow;
    }
  }
  out.log_likelihood = scale;
  return out;
}

RowMatrix backward(const EmissionTable& emissions, const TransitionMatrix& pi) {
  check_dims(emissions, pi);
  const auto n = static_cast<Eigen::Index>(emissions.steps());
  const auto d = static_cast<Eigen::Index>(emissions.states());
  const RowMatrix& P = pi.prob();
  const RowMatrix& E = emissions.scaled();
  const RowMatrix& LE = emissions.log_values();
  const auto& m = emissions.row_log_scale();

  RowMatrix log_b(n, d);
  log_b.row(n - 1).setZero();
  Eigen::RowVectorXd beta = Eigen::RowVectorXd::Constant(d, 1.0 / static_cast<double>(d));
  double scale = std::log(static_cast<double>(d));
  Eigen::VectorXd u(d), v(d);
  Eigen::RowVectorXd next(d), lrow(d);

  for (Eigen::Index t = n - 1; t >= 1; --t) {
    u = (E.row(t).array() * beta.array()).transpose().matrix();
    v.noalias() = P * u;
    const double s = v.sum();
    if (s > kTinySum && (v.array() > 0.0).all()) {
      beta = v.transpose() / s;
      scale += m[t] + std::log(s);
      log_b.row(t - 1) = beta.array().log() + scale;
    } else {
      next = LE.row(t) + log_b.row(t);
      log_backward_row(pi.log_prob(), next, lrow);
      scale = row_lse(lrow);
      beta = (lrow.array() - scale).exp().matrix();
      log_b.row(t - 1) = lrow;
    }
  }
  return log_b;
}

FBTables forward_backward(const EmissionTable& emissions, const TransitionMatrix& pi) {
  auto fwd = forward(emissions, pi);
  FBTables fb;
  fb.log_f = std::move(fwd.log_f);
  fb.log_b = backward(emissions, pi);
  fb.log_likelihood = fwd.log_likelihood;
  return fb;
}

double log_likelihood(const EmissionTable& emissions, const TransitionMatrix& pi) {
  check_dims(emissions, pi);
  const auto n = static_cast<Eigen::Index>(emissions.steps());
  const auto d = static_cast<Eigen::Index>(emissions.states());
  const RowMatrix& P = pi.prob();
  const RowMatrix& E = emissions.scaled();
  const RowMatrix& LE = emissions.log_values();
  const auto& m = emissions.row_log_scale();

  double s0 = E.row(0).sum();
  Eigen::RowVectorXd alpha = E.row(0) / s0;
  double scale = m[0] + std::log(s0) - std::log(static_cast<double>(d));
  Eigen::RowVectorXd w(d), prev(d), lrow(d);

  for (Eigen::Index t = 1; t < n; ++t) {
    w.noalias() = alpha * P;
    w.array() *= E.row(t).array();
    const double s = w.sum();
    if (s > kTinySum) {
      alpha = w / s;
      scale += m[t] + std::log(s);
    } else {
      prev = alpha.array().log() + scale;
      log_forward_row(pi.log_prob(), prev, LE.row(t), lrow);
      scale = row_lse(lrow);
      alpha = (lrow.array() - scale).exp().matrix();
    }
  }
  return scale;
}

}  // namespace scou
