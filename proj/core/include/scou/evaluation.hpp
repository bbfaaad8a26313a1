#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "scou/estimation.hpp"
#include "scou/model.hpp"

namespace scou {

// Root mean squared error over all days.
double rmse(std::span<const double> predicted, std::span<const double> truth);

// Fraction of days with lower <= truth <= upper.
double coverage_rate(std::span<const double> lower, std::span<const double> upper,
                     std::span<const double> truth);

double median(std::vector<double> values);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// Empirical ROC with one vertex per distinct score, from (0,0) to (1,1).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);
double trapezoid_auc(std::span<const RocPoint> curve);

// Mann-Whitney AUC with midranks for ties. Throws ValidationError if either
// class is absent.
double rank_auc(std::span<const double> scores, std::span<const int> labels);

struct AucEstimate {
  double auc = 0.0;
  double standard_error = 0.0;  // bootstrap, with replacement
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

AucEstimate roc_auc(std::span<const double> scores, std::span<const int> labels, std::size_t boot = 1000,
                    std::uint64_t seed = 1);

// Two-sided exact sign test on paired differences (zeros dropped).
struct SignTest {
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t ties = 0;
  double p_value = 1.0;
};
SignTest paired_sign_test(std::span<const double> differences);

enum class Method { scou, scou_true_p, kalman2, moving_average, loess };
std::string method_name(Method m);
Method parse_method(const std::string& name);
std::set<Method> all_methods();

struct ExperimentSpec {
  int id = 4;
  double grid_step = 0.1;
  std::optional<double> censor_rate;  // empty: no censoring
  ModelParams truth;                  // a and b are drawn per replicate from quantiles
  std::size_t n = 150;
  double obs_rate = 0.5;
  std::size_t replicates = 100;
  std::uint64_t seed = 20220101;
  double bounds_lo_q = 0.0002;
  double bounds_hi_q = 0.9998;
  FixedParams scou_fixed;             // restrictions applied to the SCOU fit
  std::size_t fit_restarts = 3;
  std::size_t auc_bootstrap = 1000;
  unsigned threads = 0;               // 0: hardware concurrency

  // One of the five reference configurations (ids 1-5).
  static ExperimentSpec preset(int id);
  void validate() const;
};

struct ReplicateRecord {
  std::size_t replicate = 0;
  Method method = Method::scou;
  bool ok = false;
  std::string error;
  double rmse = 0.0;
  std::optional<double> coverage;
  std::optional<ModelParams> params;  // estimated parameters, when the method has them
  std::optional<double> log_likelihood;
  std::optional<double> selected;     // LOO-CV window or span
  double censor_limit = kNegInf;
  double censored_fraction = 0.0;
  std::size_t outliers = 0;
  std::size_t observed = 0;
};

struct OutlierPool {
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<std::size_t> replicate;
};

struct MetricsTable {
  ExperimentSpec spec;
  std::set<Method> methods;
  std::vector<ReplicateRecord> records;
  std::map<Method, OutlierPool> outlier_scores;  // SCOU variants with free or non-zero p
  std::map<Method, AucEstimate> auc;

  std::vector<const ReplicateRecord*> for_method(Method m) const;
  // Values of a metric for a method over successful replicates.
  std::vector<double> rmse_values(Method m) const;
  std::vector<double> coverage_values(Method m) const;
  // Per-replicate rmse(a) - rmse(b) over replicates where both succeeded.
  std::vector<double> paired_rmse_differences(Method a, Method b) const;
};

// Runs every replicate (simulate, censor, fit and score each method).
// Results are deterministic for a given (spec, methods), regardless of threads.
MetricsTable run_experiment(const ExperimentSpec& spec, const std::set<Method>& methods);

// One CSV row per (replicate, method).
void write_metrics_csv(const MetricsTable& table, std::ostream& out);
std::string summary_json(const MetricsTable& table);

}  // namespace scou
