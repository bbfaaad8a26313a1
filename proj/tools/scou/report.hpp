#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "scou/estimation.hpp"
#include "scou/ingest.hpp"
#include "scou/posterior.hpp"

namespace scou::cli {

// One line of the smoothing report.
struct SmoothRow {
  std::string date;
  double post_mean = 0.0;
  double post_sd = 0.0;
  double pi_lo = 0.0;
  double pi_hi = 0.0;
  std::optional<double> outlier_prob;
  std::optional<double> value;
  bool observed = false;
  bool censored = false;
};

std::vector<SmoothRow> smooth_rows(const DatedSeries& data, const PosteriorSummary& post,
                                   const OutlierReport& outliers);

std::string format_double(double v);

void write_smooth_csv(const std::vector<SmoothRow>& rows, std::ostream& out);
// Static plot of the rows; draws only what the CSV already holds.
void write_smooth_svg(const std::vector<SmoothRow>& rows, double coverage, std::ostream& out);

void write_detect_csv(const DatedSeries& data, const OutlierReport& report, std::ostream& out);

struct FittedModel {
  ModelParams params;
  std::size_t d = 0;
  double log_likelihood = 0.0;
  bool converged = true;
  std::size_t evals = 0;
};

std::string params_json(const FittedModel& model);
FittedModel parse_params_json(const std::string& text);

void write_simulation_csv(const SimulationOutput& sim, std::chrono::sys_days start, std::ostream& out);
void write_truth_csv(const SimulationOutput& sim, std::chrono::sys_days start, std::ostream& out);

}  // namespace scou::cli
