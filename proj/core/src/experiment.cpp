#include <algorithm>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "scou/baselines.hpp"
#include "scou/errors.hpp"
#include "scou/evaluation.hpp"
#include "scou/parallel.hpp"
#include "scou/posterior.hpp"
#include "scou/rng.hpp"

namespace scou {
namespace {

// Linear interpolation across empty days; constant beyond the ends.
std::vector<double> fill_gaps(const std::vector<std::optional<double>>& v) {
  std::vector<std::size_t> known;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i]) known.push_back(i);
  if (known.empty()) throw NumericalError("smoother produced no value on any day");
  std::vector<double> out(v.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    while (k + 1 < known.size() && known[k + 1] <= i) ++k;
    if (v[i]) {
      out[i] = *v[i];
    } else if (i < known.front()) {
      out[i] = *v[known.front()];
    } else if (k + 1 >= known.size()) {
      out[i] = *v[known.back()];
    } else {
      const double l = static_cast<double>(known[k]), r = static_cast<double>(known[k + 1]);
      const double w = (static_cast<double>(i) - l) / (r - l);
      out[i] = (1.0 - w) * *v[known[k]] + w * *v[known[k + 1]];
    }
  }
  return out;
}

struct ReplicateOutput {
  std::vector<ReplicateRecord> records;
  std::map<Method, OutlierPool> pools;
};

ReplicateOutput run_replicate(const ExperimentSpec& spec, const std::set<Method>& methods, std::size_t r) {
  const std::uint64_t seed = splitmix64(spec.seed ^ splitmix64(r + 1));
  SimulationOptions sim_opt;
  sim_opt.obs_rate = spec.obs_rate;
  sim_opt.seed = seed;
  sim_opt.bounds_from_marginal_quantiles = std::make_pair(spec.bounds_lo_q, spec.bounds_hi_q);
  SimulationOutput sim = simulate(spec.truth, spec.n, sim_opt);

  double ell = kNegInf;
  if (spec.censor_rate) {
    std::vector<double> ystar;
    for (const auto& v : sim.ystar)
      if (v) ystar.push_back(*v);
    ell = censor_limit_for_rate(ystar, *spec.censor_rate);
    sim = apply_censoring(sim, CensoringLimits::constant(ell));
  }
  const ObservationSeries& obs = sim.observations;
  const std::vector<double>& truth = sim.latent.x;

  ReplicateRecord base;
  base.replicate = r;
  base.censor_limit = ell;
  base.observed = obs.observed_count();
  base.censored_fraction = static_cast<double>(obs.censored_count()) / static_cast<double>(base.observed);
  for (const auto& o : sim.outliers)
    if (o && *o) ++base.outliers;

  ReplicateOutput out;
  const double z = std_normal_quantile(0.975);

  for (Method m : methods) {
    ReplicateRecord rec = base;
    rec.method = m;
    try {
      switch (m) {
        case Method::scou:
        case Method::scou_true_p: {
          FitConfig cfg;
          cfg.fixed = spec.scou_fixed;
          if (m == Method::scou_true_p) cfg.fixed.p = spec.truth.p;
          cfg.bounds = OutlierBounds{sim.params.a, sim.params.b};
          cfg.grid.step = spec.grid_step;
          cfg.restarts = spec.fit_restarts;
          cfg.seed = seed;
          const FitResult f = fit(obs, cfg);
          const PosteriorSummary post = smooth(obs, f.params, f.grid, 0.95);
          rec.params = f.params;
          rec.log_likelihood = f.log_likelihood;
          rec.rmse = rmse(post.mean, truth);
          rec.coverage = coverage_rate(post.lower, post.upper, truth);
          if (f.params.p > 0.0 || !cfg.fixed.p) {
            const OutlierReport report = outlier_probabilities(obs, f.params, f.grid);
            OutlierPool& pool = out.pools[m];
            for (std::size_t t = 0; t < obs.size(); ++t) {
              if (!report.probability[t]) continue;
              pool.scores.push_back(*report.probability[t]);
              pool.labels.push_back(sim.outliers[t].value_or(false) ? 1 : 0);
              pool.replicate.push_back(r);
            }
          }
          break;
        }
        case Method::kalman2: {
          const LocalLevelResult k = kalman2_smooth(obs, false);
          std::vector<double> lo(k.mean.size()), hi(k.mean.size());
          for (std::size_t t = 0; t < k.mean.size(); ++t) {
            const double half = z * std::sqrt(k.variance[t]);
            lo[t] = k.mean[t] - half;
            hi[t] = k.mean[t] + half;
          }
          ModelParams est;
          est.eta = 1.0;
          est.delta = 0.0;
          est.sigma = k.sigma;
          est.tau = k.tau;
          est.p = 0.0;
          est.a = sim.params.a;
          est.b = sim.params.b;
          rec.params = est;
          rec.log_likelihood = k.log_likelihood;
          rec.rmse = rmse(k.mean, truth);
          rec.coverage = coverage_rate(lo, hi, truth);
          break;
        }
        case Method::moving_average:
        case Method::loess: {
          BaselineConfig cfg;
          cfg.method = m == Method::loess ? BaselineMethod::loess : BaselineMethod::moving_average;
          const BaselineOutput b = run_baseline(obs, cfg);
          rec.selected = b.chosen;
          rec.rmse = rmse(fill_gaps(b.mean), truth);
          break;
        }
      }
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::string format_double(double v) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::scou: return "scou";
    case Method::scou_true_p: return "scou_true_p";
    case Method::kalman2: return "kalman2";
    case Method::moving_average: return "moving_average";
    case Method::loess: return "loess";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : all_methods())
    if (method_name(m) == name) return m;
  throw ValidationError("unknown method '" + name + "'");
}

std::set<Method> all_methods() {
  return {Method::scou, Method::scou_true_p, Method::kalman2, Method::moving_average, Method::loess};
}

ExperimentSpec ExperimentSpec::preset(int id) {
  ExperimentSpec s;
  s.id = id;
  s.truth.sigma = 0.3;
  s.truth.tau = 0.6;
  s.truth.a = 0.0;
  s.truth.b = 1.0;
  s.seed = 20220101 + static_cast<std::uint64_t>(id);
  switch (id) {
    case 1:
    case 2:
    case 3:
      s.grid_step = id == 1 ? 0.02 : (id == 2 ? 0.1 : 0.7);
      s.truth.eta = 1.0;
      s.truth.delta = 0.0;
      s.truth.p = 0.0;
      s.scou_fixed.eta = 1.0;
      s.scou_fixed.delta = 0.0;
      s.scou_fixed.p = 0.0;
      break;
    case 4:
    case 5:
      s.grid_step = 0.1;
      s.censor_rate = id == 4 ? 0.16 : 0.31;
      s.truth.eta = 0.99;
      s.truth.delta = 0.001;
      s.truth.p = 0.07;
      break;
    default:
      throw ValidationError("experiment id must be between 1 and 5");
  }
  return s;
}

void ExperimentSpec::validate() const {
  truth.validate();
  if (replicates < 1) throw ValidationError("experiment needs at least one replicate");
  if (n < 10) throw ValidationError("experiment series must have at least 10 days");
  if (!(grid_step > 0.0)) throw ValidationError("grid step must be positive");
  if (censor_rate && !(*censor_rate > 0.0 && *censor_rate < 1.0))
    throw ValidationError("censoring rate must lie in (0, 1)");
  if (!(obs_rate > 0.0 && obs_rate <= 1.0)) throw ValidationError("obs_rate must lie in (0, 1]");
}

std::vector<const ReplicateRecord*> MetricsTable::for_method(Method m) const {
  std::vector<const ReplicateRecord*> out;
  for (const auto& r : records)
    if (r.method == m) out.push_back(&r);
  return out;
}

std::vector<double> MetricsTable::rmse_values(Method m) const {
  std::vector<double> out;
  for (const auto* r : for_method(m))
    if (r->ok) out.push_back(r->rmse);
  return out;
}

std::vector<double> MetricsTable::coverage_values(Method m) const {
  std::vector<double> out;
  for (const auto* r : for_method(m))
    if (r->ok && r->coverage) out.push_back(*r->coverage);
  return out;
}

std::vector<double> MetricsTable::paired_rmse_differences(Method a, Method b) const {
  std::map<std::size_t, double> ra;
  for (const auto* r : for_method(a))
    if (r->ok) ra[r->replicate] = r->rmse;
  std::vector<double> out;
  for (const auto* r : for_method(b)) {
    auto it = ra.find(r->replicate);
    if (r->ok && it != ra.end()) out.push_back(it->second - r->rmse);
  }
  return out;
}

MetricsTable run_experiment(const ExperimentSpec& spec, const std::set<Method>& methods) {
  spec.validate();
  if (methods.empty()) throw ValidationError("run_experiment: empty method set");

  std::vector<ReplicateOutput> outputs(spec.replicates);
  const unsigned threads = spec.threads == 0 ? default_thread_count() : spec.threads;
  parallel_for(spec.replicates, threads, [&](std::size_t r) { outputs[r] = run_replicate(spec, methods, r); });

  MetricsTable table;
  table.spec = spec;
  table.methods = methods;
  for (auto& o : outputs) {
    for (auto& rec : o.records) table.records.push_back(std::move(rec));
    for (auto& [m, pool] : o.pools) {
      OutlierPool& dst = table.outlier_scores[m];
      dst.scores.insert(dst.scores.end(), pool.scores.begin(), pool.scores.end());
      dst.labels.insert(dst.labels.end(), pool.labels.begin(), pool.labels.end());
      dst.replicate.insert(dst.replicate.end(), pool.replicate.begin(), pool.replicate.end());
    }
  }
  for (const auto& [m, pool] : table.outlier_scores) {
    try {
      table.auc[m] = roc_auc(pool.scores, pool.labels, spec.auc_bootstrap, spec.seed);
    } catch (const ValidationError&) {
      // Single-class pools have no AUC.
    }
  }
  return table;
}

void write_metrics_csv(const MetricsTable& table, std::ostream& out) {
  out << "experiment,replicate,method,ok,rmse,coverage,eta,delta,sigma,tau,p,log_likelihood,selected,"
         "censor_limit,censored_fraction,outliers,observed,error\n";
  for (const auto& r : table.records) {
    out << table.spec.id << ',' << r.replicate << ',' << method_name(r.method) << ',' << (r.ok ? 1 : 0) << ',';
    out << (r.ok ? format_double(r.rmse) : "") << ',' << optional_cell(r.coverage) << ',';
    if (r.params) {
      out << format_double(r.params->eta) << ',' << format_double(r.params->delta) << ','
          << format_double(r.params->sigma) << ',' << format_double(r.params->tau) << ','
          << format_double(r.params->p) << ',';
    } else {
      out << ",,,,,";
    }
    out << optional_cell(r.log_likelihood) << ',' << optional_cell(r.selected) << ','
        << format_double(r.censor_limit) << ',' << format_double(r.censored_fraction) << ',' << r.outliers << ','
        << r.observed << ',';
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << err << '\n';
  }
}

std::string summary_json(const MetricsTable& table) {
  using nlohmann::json;
  json j;
  j["experiment"] = table.spec.id;
  j["replicates"] = table.spec.replicates;
  j["seed"] = table.spec.seed;
  j["grid_step"] = table.spec.grid_step;
  j["censor_rate"] = table.spec.censor_rate ? json(*table.spec.censor_rate) : json(nullptr);

  json methods = json::object();
  for (Method m : table.methods) {
    json mj;
    const auto rm = table.rmse_values(m);
    const auto cv = table.coverage_values(m);
    std::size_t failures = 0;
    json per_param = json::object();
    std::map<std::string, std::vector<double>> params;
    for (const auto* r : table.for_method(m)) {
      if (!r->ok) {
        ++failures;
        continue;
      }
      if (r->params) {
        for (Param q : kAllParams) params[std::string(param_name(q))].push_back(get_param(*r->params, q));
      }
    }
    mj["failures"] = failures;
    mj["median_rmse"] = rm.empty() ? json(nullptr) : json(median(rm));
    mj["median_coverage"] = cv.empty() ? json(nullptr) : json(median(cv));
    for (auto& [name, values] : params) {
      double mean = 0.0;
      for (double v : values) mean += v;
      per_param[name] = mean / static_cast<double>(values.size());
    }
    if (!per_param.empty()) mj["mean_params"] = per_param;
    methods[method_name(m)] = mj;
  }
  j["methods"] = methods;

  json auc = json::object();
  for (const auto& [m, a] : table.auc)
    auc[method_name(m)] = {{"auc", a.auc}, {"se", a.standard_error}, {"positives", a.positives},
                           {"negatives", a.negatives}};
  j["auc"] = auc;

  json tests = json::object();
  if (table.methods.count(Method::scou)) {
    for (Method m : table.methods) {
      if (m == Method::scou || m == Method::scou_true_p) continue;
      const auto d = table.paired_rmse_differences(Method::scou, m);
      const SignTest st = paired_sign_test(d);
      tests["scou_vs_" + method_name(m)] = {
          {"scou_better", st.negative}, {"scou_worse", st.positive}, {"ties", st.ties}, {"p_value", st.p_value}};
    }
  }
  j["sign_tests"] = tests;
  return j.dump(2);
}

}  // namespace scou
