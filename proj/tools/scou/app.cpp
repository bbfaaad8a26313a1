#include "scou/app.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "scou/errors.hpp"
#include "scou/estimation.hpp"
#include "scou/evaluation.hpp"
#include "scou/ingest.hpp"
#include "scou/posterior.hpp"
#include "scou/report.hpp"

namespace scou::cli {
namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::string input;
  std::string output = "-";
  std::string svg;
  std::string params;
  std::string truth;
  std::string summary;
  bool log_transform = false;
  std::optional<std::size_t> grid_d;
  std::optional<double> grid_delta;
  std::string bounds;
  std::string bounds_quantiles;
  double coverage = 0.95;
  double threshold = kDefaultOutlierThreshold;
  std::optional<std::uint64_t> seed;
  std::string fix;
  std::size_t restarts = 3;
  bool eta_barrier = false;

  // simulate
  std::size_t n = 150;
  ModelParams sim = [] {
    ModelParams p;
    p.eta = 0.99;
    p.delta = 0.001;
    p.sigma = 0.3;
    p.tau = 0.6;
    p.p = 0.07;
    return p;
  }();
  double obs_rate = 0.5;
  std::optional<double> censor_limit;
  std::optional<double> censor_rate;
  std::string start_date = "2020-01-01";

  // benchmark
  int experiment = 4;
  std::optional<std::size_t> replicates;
  unsigned threads = 0;
  std::vector<std::string> methods;
};

// Writes to a sibling temp file; the target appears only on commit().
class OutputFile {
 public:
  OutputFile(std::string path, std::ostream& console) : path_(std::move(path)) {
    if (path_ == "-") {
      stream_ = &console;
    } else {
      tmp_ = path_ + ".tmp";
      file_ = std::make_unique<std::ofstream>(tmp_, std::ios::binary | std::ios::trunc);
      if (!*file_) throw ValidationError("cannot open output file '" + path_ + "'");
      stream_ = file_.get();
    }
  }
  OutputFile(const OutputFile&) = delete;
  OutputFile& operator=(const OutputFile&) = delete;
  ~OutputFile() {
    if (file_ && !committed_) {
      file_->close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return *stream_; }

  void commit() {
    if (!file_) {
      stream_->flush();
      return;
    }
    file_->close();
    if (!*file_) throw std::runtime_error("failed writing '" + path_ + "'");
    fs::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  std::string path_;
  std::string tmp_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
  bool committed_ = false;
};

std::pair<double, double> parse_pair(const std::string& text, const char* what) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ValidationError(std::string(what) + " expects 'lo,hi'");
  try {
    std::size_t used = 0;
    const std::string l = text.substr(0, comma), h = text.substr(comma + 1);
    const double lo = std::stod(l, &used);
    if (used != l.size()) throw std::invalid_argument(l);
    const double hi = std::stod(h, &used);
    if (used != h.size()) throw std::invalid_argument(h);
    if (!(lo < hi)) throw ValidationError(std::string(what) + " needs lo < hi");
    return {lo, hi};
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw ValidationError(std::string(what) + " expects two numbers 'lo,hi', got '" + text + "'");
  }
}

FixedParams parse_fix(const std::string& text) {
  FixedParams fixed;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("--fix expects name=value pairs, got '" + item + "'");
    const Param p = parse_param(item.substr(0, eq));
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("--fix value for '" + item.substr(0, eq) + "' is not a number");
    }
    fixed.set(p, v);
  }
  return fixed;
}

std::uint64_t resolve_seed(const RunConfig& cfg, std::uint64_t fallback) {
  if (cfg.seed) return *cfg.seed;
  if (const char* env = std::getenv("SCOU_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::strlen(env)) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw ValidationError(std::string("SCOU_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  return fallback;
}

void check_distinct(std::initializer_list<std::string> paths) {
  std::vector<fs::path> seen;
  for (const auto& p : paths) {
    if (p.empty() || p == "-") continue;
    const fs::path norm = fs::weakly_canonical(fs::path(p));
    for (const auto& s : seen)
      if (s == norm) throw ValidationError("input and output paths must differ ('" + p + "')");
    seen.push_back(norm);
  }
}

void require_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw ValidationError("--input is required");
}

void check_common(const RunConfig& cfg) {
  if (!(cfg.coverage > 0.0 && cfg.coverage < 1.0)) throw ValidationError("--coverage must lie in (0, 1)");
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) throw ValidationError("--threshold-h must lie in (0, 1)");
  if (cfg.grid_d && *cfg.grid_d < 2) throw ValidationError("--grid-d must be at least 2");
  if (cfg.grid_delta && !(*cfg.grid_delta > 0.0)) throw ValidationError("--grid-delta must be positive");
}

FitConfig fit_config(const RunConfig& cfg) {
  FitConfig fc;
  fc.fixed = parse_fix(cfg.fix);
  fc.grid.d = cfg.grid_d;
  fc.grid.step = cfg.grid_delta;
  if (!cfg.bounds.empty()) {
    const auto [a, b] = parse_pair(cfg.bounds, "--bounds");
    fc.bounds = OutlierBounds{a, b};
  }
  if (!cfg.bounds_quantiles.empty()) {
    const auto [lo, hi] = parse_pair(cfg.bounds_quantiles, "--bounds-quantiles");
    if (!(lo >= 0.0 && hi <= 1.0)) throw ValidationError("--bounds-quantiles must lie in [0, 1]");
    fc.bounds_lo_q = lo;
    fc.bounds_hi_q = hi;
  }
  fc.restarts = cfg.restarts;
  fc.eta_barrier = cfg.eta_barrier;
  fc.seed = resolve_seed(cfg, 1);
  fc.validate();
  return fc;
}

// Parameters from --params when given, otherwise a fresh fit.
FittedModel obtain_model(const RunConfig& cfg, const DatedSeries& data) {
  if (!cfg.params.empty()) {
    std::ifstream in(cfg.params);
    if (!in) throw ValidationError("cannot open parameters file '" + cfg.params + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    FittedModel m = parse_params_json(ss.str());
    m.log_likelihood = log_likelihood_at(data.series, m.params, Grid::uniform(m.params.a, m.params.b, m.d));
    return m;
  }
  const FitResult f = fit(data.series, fit_config(cfg));
  return FittedModel{f.params, f.grid.d, f.log_likelihood, f.converged, f.evals_used};
}

int cmd_fit(const RunConfig& cfg, std::ostream& console) {
  require_input(cfg);
  check_common(cfg);
  check_distinct({cfg.input, cfg.output});
  const DatedSeries data = ingest_file(cfg.input, {cfg.log_transform});
  OutputFile out(cfg.output, console);
  const FitResult f = fit(data.series, fit_config(cfg));
  out.stream() << params_json({f.params, f.grid.d, f.log_likelihood, f.converged, f.evals_used});
  out.commit();
  return kExitOk;
}

int cmd_smooth(const RunConfig& cfg, std::ostream& console) {
  require_input(cfg);
  check_common(cfg);
  check_distinct({cfg.input, cfg.output, cfg.svg, cfg.params});
  const DatedSeries data = ingest_file(cfg.input, {cfg.log_transform});
  OutputFile out(cfg.output, console);
  std::unique_ptr<OutputFile> svg;
  if (!cfg.svg.empty()) svg = std::make_unique<OutputFile>(cfg.svg, console);

  const FittedModel model = obtain_model(cfg, data);
  const Grid grid = Grid::uniform(model.params.a, model.params.b, model.d);
  const PosteriorSummary post = smooth(data.series, model.params, grid, cfg.coverage);
  const OutlierReport report = outlier_probabilities(data.series, model.params, grid);
  const auto rows = smooth_rows(data, post, report);
  write_smooth_csv(rows, out.stream());
  if (svg) write_smooth_svg(rows, cfg.coverage, svg->stream());
  out.commit();
  if (svg) svg->commit();
  return kExitOk;
}

int cmd_detect(const RunConfig& cfg, std::ostream& console) {
  require_input(cfg);
  check_common(cfg);
  check_distinct({cfg.input, cfg.output, cfg.params});
  const DatedSeries data = ingest_file(cfg.input, {cfg.log_transform});
  OutputFile out(cfg.output, console);
  const FittedModel model = obtain_model(cfg, data);
  const Grid grid = Grid::uniform(model.params.a, model.params.b, model.d);
  const OutlierReport report = detect_outliers(outlier_probabilities(data.series, model.params, grid), cfg.threshold);
  write_detect_csv(data, report, out.stream());
  out.commit();
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& console, const std::set<std::string>& given) {
  check_distinct({cfg.output, cfg.truth});
  if (cfg.n < 1) throw ValidationError("--n must be at least 1");
  if (cfg.censor_limit && cfg.censor_rate) throw ValidationError("give either --censor-limit or --censor-rate");
  SimulationOptions opt;
  opt.obs_rate = cfg.obs_rate;
  opt.seed = resolve_seed(cfg, 1);
  if (!(given.count("a") && given.count("b"))) {
    double lo = 0.0002, hi = 0.9998;
    if (!cfg.bounds_quantiles.empty()) std::tie(lo, hi) = parse_pair(cfg.bounds_quantiles, "--bounds-quantiles");
    opt.bounds_from_marginal_quantiles = std::make_pair(lo, hi);
  }
  if (cfg.censor_limit) opt.ell = CensoringLimits::constant(*cfg.censor_limit);
  ModelParams params = cfg.sim;
  if (opt.bounds_from_marginal_quantiles) {
    params.a = 0.0;
    params.b = 1.0;
  }
  SimulationOutput sim = simulate(params, cfg.n, opt);
  if (cfg.censor_rate) {
    if (!(*cfg.censor_rate > 0.0 && *cfg.censor_rate < 1.0))
      throw ValidationError("--censor-rate must lie in (0, 1)");
    std::vector<double> ystar;
    for (const auto& v : sim.ystar)
      if (v) ystar.push_back(*v);
    if (ystar.empty()) throw ValidationError("no observed days to censor");
    sim = apply_censoring(sim, CensoringLimits::constant(censor_limit_for_rate(ystar, *cfg.censor_rate)));
  }
  const auto start = parse_date(cfg.start_date);
  OutputFile out(cfg.output, console);
  std::unique_ptr<OutputFile> truth;
  if (!cfg.truth.empty()) truth = std::make_unique<OutputFile>(cfg.truth, console);
  write_simulation_csv(sim, start, out.stream());
  if (truth) write_truth_csv(sim, start, truth->stream());
  out.commit();
  if (truth) truth->commit();
  return kExitOk;
}

int cmd_benchmark(const RunConfig& cfg, std::ostream& console) {
  check_distinct({cfg.output, cfg.summary});
  ExperimentSpec spec = ExperimentSpec::preset(cfg.experiment);
  if (cfg.replicates) spec.replicates = *cfg.replicates;
  spec.seed = resolve_seed(cfg, spec.seed);
  if (cfg.grid_delta) spec.grid_step = *cfg.grid_delta;
  spec.threads = cfg.threads;
  spec.fit_restarts = cfg.restarts;
  if (!cfg.fix.empty()) spec.scou_fixed = parse_fix(cfg.fix);
  if (!cfg.bounds_quantiles.empty()) {
    std::tie(spec.bounds_lo_q, spec.bounds_hi_q) = parse_pair(cfg.bounds_quantiles, "--bounds-quantiles");
  }
  std::set<Method> methods;
  for (const auto& m : cfg.methods) methods.insert(parse_method(m));
  if (methods.empty()) methods = all_methods();
  spec.validate();

  OutputFile out(cfg.output, console);
  std::unique_ptr<OutputFile> summary;
  if (!cfg.summary.empty()) summary = std::make_unique<OutputFile>(cfg.summary, console);
  const MetricsTable table = run_experiment(spec, methods);
  write_metrics_csv(table, out.stream());
  if (summary) summary->stream() << summary_json(table) << '\n';
  out.commit();
  if (summary) summary->commit();
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Censored, outlier-robust smoothing of daily time series"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "scou 0.1.0");

  auto add_io = [&](CLI::App* sub, bool input) {
    if (input) sub->add_option("--input,-i", cfg.input, "Input CSV: date,value,limit[,censored]");
    sub->add_option("--output,-o", cfg.output, "Output path ('-' for stdout)");
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_flag("--log", cfg.log_transform, "Log-transform values and limits");
    auto* d = sub->add_option("--grid-d", cfg.grid_d, "Number of grid points");
    sub->add_option("--grid-delta", cfg.grid_delta, "Target grid spacing")->excludes(d);
    sub->add_option("--bounds", cfg.bounds, "Outlier bounds a,b (also the grid range)");
    sub->add_option("--bounds-quantiles", cfg.bounds_quantiles, "Quantile levels lo,hi for a,b");
    sub->add_option("--fix", cfg.fix, "Fixed parameters, e.g. eta=1,delta=0");
    sub->add_option("--restarts", cfg.restarts, "Optimizer restarts");
    sub->add_flag("--eta-barrier", cfg.eta_barrier, "Penalize eta above 1.05");
    sub->add_option("--seed", cfg.seed, "Random seed (falls back to SCOU_SEED)");
  };

  auto* fit_cmd = app.add_subcommand("fit", "Fit model parameters by maximum likelihood");
  add_io(fit_cmd, true);
  add_model(fit_cmd);

  auto* smooth_cmd = app.add_subcommand("smooth", "Posterior mean, sd and intervals per day");
  add_io(smooth_cmd, true);
  add_model(smooth_cmd);
  smooth_cmd->add_option("--params", cfg.params, "Parameters JSON from 'fit' (skips fitting)");
  smooth_cmd->add_option("--coverage", cfg.coverage, "Prediction interval level");
  smooth_cmd->add_option("--svg", cfg.svg, "Also write an SVG plot");

  auto* detect_cmd = app.add_subcommand("detect", "List observations flagged as outliers");
  add_io(detect_cmd, true);
  add_model(detect_cmd);
  detect_cmd->add_option("--params", cfg.params, "Parameters JSON from 'fit' (skips fitting)");
  detect_cmd->add_option("--threshold-h", cfg.threshold, "Flag when P(outlier) > h");

  std::set<std::string> given;
  auto* sim_cmd = app.add_subcommand("simulate", "Draw a synthetic dataset");
  add_io(sim_cmd, false);
  sim_cmd->add_option("--truth", cfg.truth, "Also write latent states and outlier flags");
  sim_cmd->add_option("--n", cfg.n, "Number of days");
  sim_cmd->add_option("--eta", cfg.sim.eta, "Autoregressive coefficient");
  sim_cmd->add_option("--delta", cfg.sim.delta, "Drift");
  sim_cmd->add_option("--sigma", cfg.sim.sigma, "Innovation sd");
  sim_cmd->add_option("--tau", cfg.sim.tau, "Measurement noise sd");
  sim_cmd->add_option("--p", cfg.sim.p, "Outlier probability");
  auto* a_opt = sim_cmd->add_option("--a", cfg.sim.a, "Outlier lower bound");
  auto* b_opt = sim_cmd->add_option("--b", cfg.sim.b, "Outlier upper bound");
  sim_cmd->add_option("--bounds-quantiles", cfg.bounds_quantiles, "Quantiles of the pre-measurement law for a,b");
  sim_cmd->add_option("--obs-rate", cfg.obs_rate, "Fraction of observed days");
  sim_cmd->add_option("--censor-limit", cfg.censor_limit, "Constant censoring limit");
  sim_cmd->add_option("--censor-rate", cfg.censor_rate, "Censor this fraction of observations");
  sim_cmd->add_option("--start-date", cfg.start_date, "First date (YYYY-MM-DD)");
  sim_cmd->add_option("--seed", cfg.seed, "Random seed (falls back to SCOU_SEED)");

  auto* bench_cmd = app.add_subcommand("benchmark", "Run a simulation experiment (1-5)");
  add_io(bench_cmd, false);
  bench_cmd->add_option("--experiment", cfg.experiment, "Experiment id")->check(CLI::Range(1, 5));
  bench_cmd->add_option("--replicates", cfg.replicates, "Number of replicates");
  bench_cmd->add_option("--summary", cfg.summary, "Also write a JSON summary");
  bench_cmd->add_option("--grid-delta", cfg.grid_delta, "Override the grid spacing");
  bench_cmd->add_option("--bounds-quantiles", cfg.bounds_quantiles, "Quantile levels lo,hi for a,b");
  bench_cmd->add_option("--fix", cfg.fix, "Restrictions on the SCOU fit");
  bench_cmd->add_option("--restarts", cfg.restarts, "Optimizer restarts per fit");
  bench_cmd->add_option("--methods", cfg.methods, "Subset of methods")->delimiter(',');
  bench_cmd->add_option("--threads", cfg.threads, "Worker threads (0: all cores)");
  bench_cmd->add_option("--seed", cfg.seed, "Random seed (falls back to SCOU_SEED)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  if (a_opt->count()) given.insert("a");
  if (b_opt->count()) given.insert("b");

  try {
    if (fit_cmd->parsed()) return cmd_fit(cfg, out);
    if (smooth_cmd->parsed()) return cmd_smooth(cfg, out);
    if (detect_cmd->parsed()) return cmd_detect(cfg, out);
    if (sim_cmd->parsed()) return cmd_simulate(cfg, out, given);
    if (bench_cmd->parsed()) return cmd_benchmark(cfg, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const FitError& e) {
    err << "fit failed: " << e.what() << '\n';
    return kExitFit;
  } catch (const NumericalError& e) {
    err << "fit failed: " << e.what() << '\n';
    return kExitFit;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitValidation;
}

}  // namespace scou::cli
