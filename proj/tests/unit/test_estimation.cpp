#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "scou/errors.hpp"
#include "scou/estimation.hpp"
#include "scou/nelder_mead.hpp"

namespace {

using scou::FitConfig;
using scou::ModelParams;
using scou::Param;

ModelParams truth(double p = 0.07) {
  ModelParams m;
  m.eta = 0.99;
  m.delta = 0.001;
  m.sigma = 0.3;
  m.tau = 0.6;
  m.p = p;
  return m;
}

scou::SimulationOutput replicate(std::uint64_t seed, const ModelParams& m, std::size_t n = 150,
                                 std::optional<double> rate = 0.16) {
  scou::SimulationOptions opt;
  opt.seed = seed;
  opt.bounds_from_marginal_quantiles = std::make_pair(0.0002, 0.9998);
  auto sim = scou::simulate(m, n, opt);
  if (!rate) return sim;
  std::vector<double> ystar;
  for (const auto& v : sim.ystar)
    if (v) ystar.push_back(*v);
  return scou::apply_censoring(sim, scou::CensoringLimits::constant(scou::censor_limit_for_rate(ystar, *rate)));
}

FitConfig config_for(const scou::SimulationOutput& sim) {
  FitConfig cfg;
  cfg.bounds = scou::OutlierBounds{sim.params.a, sim.params.b};
  cfg.grid.step = 0.1;
  return cfg;
}

TEST(NelderMead, MinimizesRosenbrock) {
  auto f = [](const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  scou::NelderMeadOptions opt;
  opt.max_evals = 5000;
  opt.rel_tol = 1e-14;
  const auto r = scou::nelder_mead(f, {-1.2, 1.0}, {0.5, 0.5}, opt);
  EXPECT_NEAR(r.x[0], 1.0, 1e-3);
  EXPECT_NEAR(r.x[1], 1.0, 2e-3);
  EXPECT_LE(r.evals, 5000u);
}

TEST(NelderMead, NonFiniteValuesAreRejected) {
  auto f = [](const std::vector<double>& x) { return x[0] < 0.0 ? std::nan("") : (x[0] - 2.0) * (x[0] - 2.0); };
  const auto r = scou::nelder_mead(f, {0.5}, {1.0}, {});
  EXPECT_NEAR(r.x[0], 2.0, 1e-3);
  EXPECT_TRUE(r.converged);
}

TEST(ParamTransform, RoundTripIsIdentity) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const scou::ParamTransform t{scou::FixedParams{}};
  ASSERT_EQ(t.dimension(), 5u);
  for (int i = 0; i < 1000; ++i) {
    ModelParams m;
    m.eta = -2.0 + 4.0 * u(rng);
    m.delta = -1.0 + 2.0 * u(rng);
    m.sigma = std::exp(-8.0 + 10.0 * u(rng));
    m.tau = std::exp(-8.0 + 10.0 * u(rng));
    m.p = 1e-6 + (1.0 - 2e-6) * u(rng);
    const ModelParams back = t.from_free(t.to_free(m), m);
    EXPECT_NEAR(back.eta, m.eta, 1e-12);
    EXPECT_NEAR(back.delta, m.delta, 1e-12);
    EXPECT_NEAR(back.sigma, m.sigma, 1e-12 * m.sigma);
    EXPECT_NEAR(back.tau, m.tau, 1e-12 * m.tau);
    EXPECT_NEAR(back.p, m.p, 1e-12);
  }
}

TEST(ParamTransform, FixedParamsAreExcluded) {
  scou::FixedParams fixed;
  fixed.eta = 1.0;
  fixed.delta = 0.0;
  const scou::ParamTransform t(fixed);
  EXPECT_EQ(t.dimension(), 3u);
  const ModelParams m = t.from_free(t.to_free(truth()), truth());
  EXPECT_EQ(m.eta, 1.0);
  EXPECT_EQ(m.delta, 0.0);
}

TEST(ParamNames, ParseAndPrint) {
  for (Param p : scou::kAllParams) EXPECT_EQ(scou::parse_param(scou::param_name(p)), p);
  EXPECT_THROW(scou::parse_param("rho"), scou::ValidationError);
}

TEST(FitConfig, Validation) {
  FitConfig c;
  c.restarts = 0;
  EXPECT_THROW(c.validate(), scou::ValidationError);
  c = FitConfig{};
  c.max_evals = 50;
  EXPECT_THROW(c.validate(), scou::ValidationError);
  c = FitConfig{};
  c.tol = 0.0;
  EXPECT_THROW(c.validate(), scou::ValidationError);
}

TEST(Fit, NeedsTenObservations) {
  std::vector<scou::Observation> entries(30);
  for (int t = 0; t < 30; ++t) {
    entries[static_cast<std::size_t>(t)].t = t + 1;
    if (t % 3 == 0 && t < 27) entries[static_cast<std::size_t>(t)].y = 0.1 * t;
  }
  const scou::ObservationSeries obs(entries);
  ASSERT_EQ(obs.observed_count(), 9u);
  try {
    scou::fit(obs, FitConfig{});
    FAIL() << "expected a validation error";
  } catch (const scou::ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("at least 10"), std::string::npos);
  }
}

TEST(Fit, BeatsTruthAndIsStationary) {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const auto sim = replicate(seed, truth());
    const FitConfig cfg = config_for(sim);
    const auto r = scou::fit(sim.observations, cfg);
    const double at_truth = scou::log_likelihood_at(sim.observations, sim.params, r.grid);
    EXPECT_GE(r.log_likelihood, at_truth - cfg.tol * std::abs(at_truth)) << seed;
    EXPECT_EQ(r.restart_scores.size(), cfg.restarts);
    EXPECT_NO_THROW(r.params.validate());

    FitConfig again = cfg;
    again.init = r.params;
    again.restarts = 1;
    const auto r2 = scou::fit(sim.observations, again);
    EXPECT_LT(std::abs(r2.log_likelihood - r.log_likelihood), 1e-5 * std::abs(r.log_likelihood) + 1e-6) << seed;
  }
}

TEST(Fit, DeterministicGivenSeed) {
  const auto sim = replicate(6, truth());
  const auto a = scou::fit(sim.observations, config_for(sim));
  const auto b = scou::fit(sim.observations, config_for(sim));
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.log_likelihood, b.log_likelihood);
}

TEST(Fit, RespectsFixedParameters) {
  const auto sim = replicate(7, truth());
  FitConfig cfg = config_for(sim);
  cfg.fixed.eta = 1.0;
  cfg.fixed.delta = 0.0;
  cfg.fixed.p = 0.0;
  const auto r = scou::fit(sim.observations, cfg);
  EXPECT_EQ(r.params.eta, 1.0);
  EXPECT_EQ(r.params.delta, 0.0);
  EXPECT_EQ(r.params.p, 0.0);

  FitConfig all = config_for(sim);
  for (Param p : scou::kAllParams) all.fixed.set(p, scou::get_param(sim.params, p));
  const auto z = scou::fit(sim.observations, all);
  EXPECT_EQ(z.evals_used, 1u);
  EXPECT_DOUBLE_EQ(z.log_likelihood, scou::log_likelihood_at(sim.observations, sim.params, z.grid));
}

TEST(Fit, GridAndBoundsFixedBeforeOptimizing) {
  const auto sim = replicate(8, truth());
  FitConfig cfg;
  cfg.grid.d = 77;
  const auto r = scou::fit(sim.observations, cfg);
  const auto bounds = scou::default_outlier_bounds(sim.observations);
  EXPECT_EQ(r.grid.d, 77u);
  EXPECT_EQ(r.params.a, bounds.a);
  EXPECT_EQ(r.params.b, bounds.b);
}

TEST(Fit, RecoversNoiseScalesOnCleanData) {
  std::vector<double> sig, tau;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto sim = replicate(500 + seed, truth(0.0), 150, std::nullopt);
    FitConfig cfg = config_for(sim);
    cfg.fixed.p = 0.0;
    cfg.restarts = 2;
    const auto r = scou::fit(sim.observations, cfg);
    sig.push_back(r.params.sigma);
    tau.push_back(r.params.tau);
  }
  auto within = [](const std::vector<double>& v, double target) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double se = std::sqrt(ss / (n - 1) / n);
    return std::abs(mean - target) / se;
  };
  EXPECT_LT(within(sig, 0.3), 3.0);
  EXPECT_LT(within(tau, 0.6), 3.0);
}

TEST(Profile, OutlierRateOnCleanDataPeaksAtZero) {
  const auto sim = replicate(9, truth(0.0), 150, std::nullopt);
  FitConfig cfg = config_for(sim);
  cfg.restarts = 1;
  const std::vector<double> ps{0.0, 0.02, 0.04, 0.08, 0.16};
  const auto prof = scou::profile_likelihood(sim.observations, cfg, Param::p, ps);
  ASSERT_EQ(prof.size(), ps.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < prof.size(); ++i) {
    ASSERT_TRUE(prof[i].log_likelihood) << prof[i].error;
    EXPECT_EQ(prof[i].params->p, ps[i]);
    if (*prof[i].log_likelihood > *prof[best].log_likelihood) best = i;
  }
  EXPECT_LE(best, 1u);
}

TEST(Profile, TauIsUnimodalNearFullFit) {
  const auto sim = replicate(10, truth());
  FitConfig cfg = config_for(sim);
  cfg.restarts = 1;
  const auto full = scou::fit(sim.observations, cfg);
  std::vector<double> taus;
  for (double t = 0.05; t <= 1.0001; t += 0.05) taus.push_back(t);
  const auto prof = scou::profile_likelihood(sim.observations, cfg, Param::tau, taus);
  std::size_t best = 0;
  for (std::size_t i = 0; i < prof.size(); ++i) {
    ASSERT_TRUE(prof[i].log_likelihood) << prof[i].error;
    if (*prof[i].log_likelihood > *prof[best].log_likelihood) best = i;
  }
  for (std::size_t i = 1; i <= best; ++i) EXPECT_GE(*prof[i].log_likelihood, *prof[i - 1].log_likelihood - 1e-3);
  for (std::size_t i = best + 1; i < prof.size(); ++i)
    EXPECT_LE(*prof[i].log_likelihood, *prof[i - 1].log_likelihood + 1e-3);
  EXPECT_LE(*prof[best].log_likelihood, full.log_likelihood + 1e-6);
  EXPECT_LE(std::abs(taus[best] - full.params.tau), 0.05 + 1e-9);
}

TEST(Profile, EtaAboveOneDegradesOnLongSeries) {
  const auto sim = replicate(11, truth(), 600);
  FitConfig cfg = config_for(sim);
  cfg.restarts = 1;
  const std::vector<double> etas{0.9, 0.95, 0.99, 1.0, 1.02, 1.05};
  const auto prof = scou::profile_likelihood(sim.observations, cfg, Param::eta, etas);
  double best = scou::kNegInf;
  for (const auto& pt : prof) {
    ASSERT_TRUE(pt.log_likelihood) << pt.error;
    best = std::max(best, *pt.log_likelihood);
  }
  EXPECT_LT(*prof.back().log_likelihood, best - 10.0);
  EXPECT_LT(*prof.back().log_likelihood, *prof[4].log_likelihood);
}

}  // namespace
