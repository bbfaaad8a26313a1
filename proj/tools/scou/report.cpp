#include "scou/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "scou/errors.hpp"

namespace scou::cli {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<SmoothRow> smooth_rows(const DatedSeries& data, const PosteriorSummary& post,
                                   const OutlierReport& outliers) {
  const std::size_t n = data.series.size();
  std::vector<SmoothRow> rows(n);
  for (std::size_t t = 0; t < n; ++t) {
    const Observation& o = data.series[t];
    SmoothRow& r = rows[t];
    r.date = format_date(data.date(t));
    r.post_mean = post.mean[t];
    r.post_sd = post.sd[t];
    r.pi_lo = post.lower[t];
    r.pi_hi = post.upper[t];
    r.outlier_prob = outliers.probability[t];
    r.value = o.y;
    r.observed = o.y.has_value();
    r.censored = o.censored;
  }
  return rows;
}

void write_smooth_csv(const std::vector<SmoothRow>& rows, std::ostream& out) {
  out << "date,post_mean,post_sd,pi_lo,pi_hi,outlier_prob,observed,censored\n";
  for (const auto& r : rows) {
    out << r.date << ',' << format_double(r.post_mean) << ',' << format_double(r.post_sd) << ','
        << format_double(r.pi_lo) << ',' << format_double(r.pi_hi) << ','
        << (r.outlier_prob ? format_double(*r.outlier_prob) : "") << ',' << (r.observed ? 1 : 0) << ','
        << (r.censored ? 1 : 0) << '\n';
  }
}

void write_smooth_svg(const std::vector<SmoothRow>& rows, double coverage, std::ostream& out) {
  const double width = 900, height = 360, left = 60, right = 20, top = 30, bottom = 40;
  double lo = kInf, hi = kNegInf;
  for (const auto& r : rows) {
    lo = std::min({lo, r.pi_lo, r.value.value_or(kInf)});
    hi = std::max({hi, r.pi_hi, r.value.value_or(kNegInf)});
  }
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double n = static_cast<double>(std::max<std::size_t>(rows.size(), 2) - 1);
  auto px = [&](std::size_t t) { return left + (width - left - right) * static_cast<double>(t) / n; };
  auto py = [&](double v) { return top + (height - top - bottom) * (hi - v) / (hi - lo); };
  char buf[96];
  auto pt = [&](double x, double y) {
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x, y);
    return std::string(buf);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::string band;
  for (std::size_t t = 0; t < rows.size(); ++t) band += pt(px(t), py(rows[t].pi_hi));
  for (std::size_t t = rows.size(); t-- > 0;) band += pt(px(t), py(rows[t].pi_lo));
  out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" points=\"" << band << "\"/>\n";
  std::string mean;
  for (std::size_t t = 0; t < rows.size(); ++t) mean += pt(px(t), py(rows[t].post_mean));
  out << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" points=\"" << mean << "\"/>\n";
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const auto& r = rows[t];
    if (!r.value) continue;
    const char* colour = r.censored ? "#969696" : (r.outlier_prob && *r.outlier_prob > 0.5 ? "#e6550d" : "black");
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n", px(t),
                  py(*r.value), colour);
    out << buf;
  }
  out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
  std::snprintf(buf, sizeof buf, "%.3g", hi);
  out << "<text x=\"4\" y=\"" << top + 4 << "\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.3g", lo);
  out << "<text x=\"4\" y=\"" << height - bottom << "\">" << buf << "</text>\n";
  if (!rows.empty()) {
    out << "<text x=\"" << left << "\" y=\"" << height - 12 << "\">" << rows.front().date << "</text>\n";
    out << "<text x=\"" << width - right << "\" y=\"" << height - 12 << "\" text-anchor=\"end\">"
        << rows.back().date << "</text>\n";
  }
  std::snprintf(buf, sizeof buf, "posterior mean and %.0f%% interval", 100.0 * coverage);
  out << "<text x=\"" << left << "\" y=\"18\">" << buf << "</text>\n";
  out << "</svg>\n";
}

void write_detect_csv(const DatedSeries& data, const OutlierReport& report, std::ostream& out) {
  out << "date,value,censored,outlier_prob\n";
  for (std::size_t t = 0; t < data.series.size(); ++t) {
    if (!report.flagged[t]) continue;
    const Observation& o = data.series[t];
    out << format_date(data.date(t)) << ',' << format_double(*o.y) << ',' << (o.censored ? 1 : 0) << ','
        << format_double(*report.probability[t]) << '\n';
  }
}

std::string params_json(const FittedModel& m) {
  nlohmann::ordered_json j;
  j["eta"] = m.params.eta;
  j["delta"] = m.params.delta;
  j["sigma"] = m.params.sigma;
  j["tau"] = m.params.tau;
  j["p"] = m.params.p;
  j["a"] = m.params.a;
  j["b"] = m.params.b;
  j["D"] = m.d;
  j["log_likelihood"] = m.log_likelihood;
  j["converged"] = m.converged;
  j["evals"] = m.evals;
  return j.dump(2) + "\n";
}

FittedModel parse_params_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("parameters file is not valid JSON: ") + e.what());
  }
  FittedModel m;
  auto req = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number()) throw ValidationError(std::string("parameters file lacks '") + key + "'");
    return j[key].get<double>();
  };
  m.params.eta = req("eta");
  m.params.delta = req("delta");
  m.params.sigma = req("sigma");
  m.params.tau = req("tau");
  m.params.p = req("p");
  m.params.a = req("a");
  m.params.b = req("b");
  m.params.validate();
  const double d = req("D");
  if (!(d >= 2.0) || d != std::floor(d)) throw ValidationError("parameters file: D must be an integer >= 2");
  m.d = static_cast<std::size_t>(d);
  if (j.contains("log_likelihood") && j["log_likelihood"].is_number()) m.log_likelihood = j["log_likelihood"];
  return m;
}

void write_simulation_csv(const SimulationOutput& sim, std::chrono::sys_days start, std::ostream& out) {
  out << "date,value,limit,censored\n";
  const auto& obs = sim.observations;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    const Observation& o = obs[t];
    out << format_date(start + std::chrono::days(t)) << ',' << (o.y ? format_double(*o.y) : "") << ','
        << (std::isfinite(o.ell) ? format_double(o.ell) : "") << ',' << (o.y ? (o.censored ? "1" : "0") : "")
        << '\n';
  }
}

void write_truth_csv(const SimulationOutput& sim, std::chrono::sys_days start, std::ostream& out) {
  out << "date,x,ystar,outlier\n";
  for (std::size_t t = 0; t < sim.latent.x.size(); ++t) {
    out << format_date(start + std::chrono::days(t)) << ',' << format_double(sim.latent.x[t]) << ','
        << (sim.ystar[t] ? format_double(*sim.ystar[t]) : "") << ','
        << (sim.outliers[t] ? (*sim.outliers[t] ? "1" : "0") : "") << '\n';
  }
}

}  // namespace scou::cli
