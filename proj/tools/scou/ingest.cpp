#include "scou/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "scou/errors.hpp"

namespace scou::cli {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(const std::string& text, std::size_t line, const char* column) {
  const std::string t = lower(text);
  if (t == "-inf" || t == "-infinity") return kNegInf;
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last)
    throw ParseError(line, std::string("cannot parse ") + column + " '" + text + "'");
  if (std::isnan(v) || (std::isinf(v) && v > 0))
    throw ParseError(line, std::string(column) + " must be a number");
  return v;
}

std::optional<bool> parse_flag(const std::string& text, std::size_t line) {
  const std::string t = lower(text);
  if (t.empty()) return std::nullopt;
  if (t == "1" || t == "true" || t == "yes") return true;
  if (t == "0" || t == "false" || t == "no") return false;
  throw ParseError(line, "cannot parse censored flag '" + text + "'");
}

}  // namespace

std::chrono::sys_days parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  const bool shape = text.size() == 10 && text[4] == '-' && text[7] == '-';
  auto num = [&](std::size_t off, std::size_t len, auto& out) {
    auto [ptr, ec] = std::from_chars(text.data() + off, text.data() + off + len, out);
    return ec == std::errc() && ptr == text.data() + off + len;
  };
  if (!shape || !num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d))
    throw ValidationError("invalid ISO-8601 date '" + text + "'");
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw ValidationError("invalid calendar date '" + text + "'");
  return std::chrono::sys_days{ymd};
}

std::string format_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

DatedSeries ingest(std::istream& in, const IngestOptions& options) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  for (auto& h : header) h = lower(h);
  const bool has_flag = header.size() == 4 && header[3] == "censored";
  if (header.size() < 3 || header[0] != "date" || header[1] != "value" || header[2] != "limit" ||
      (header.size() == 4 && !has_flag) || header.size() > 4)
    throw ParseError(std::max<std::size_t>(lineno, 1), "expected header 'date,value,limit[,censored]'");

  struct Row {
    std::chrono::sys_days date;
    Observation obs;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw ParseError(lineno, "expected " + std::to_string(header.size()) + " fields, found " +
                                   std::to_string(cells.size()));
    std::chrono::sys_days date;
    try {
      date = parse_date(cells[0]);
    } catch (const ValidationError& e) {
      throw ParseError(lineno, e.what());
    }
    if (!rows.empty()) {
      if (date == rows.back().date) throw ParseError(lineno, "duplicate date " + cells[0]);
      if (date < rows.back().date) throw ParseError(lineno, "dates are not increasing at " + cells[0]);
    }

    std::optional<double> value;
    if (!cells[1].empty()) value = parse_number(cells[1], lineno, "value");
    if (value && std::isinf(*value)) throw ParseError(lineno, "value must be finite");
    const double limit = cells[2].empty() ? kNegInf : parse_number(cells[2], lineno, "limit");
    const std::optional<bool> flag = has_flag ? parse_flag(cells[3], lineno) : std::nullopt;

    Observation obs;
    obs.ell = limit;
    if (flag && *flag) {
      if (!std::isfinite(limit)) throw ParseError(lineno, "censored row needs a finite limit");
      if (value && *value > limit) throw ParseError(lineno, "censored row has a value above its limit");
      obs.y = limit;
      obs.censored = true;
    } else if (value) {
      if (flag && *value < limit) throw ParseError(lineno, "value below limit on a row marked uncensored");
      obs.censored = *value <= limit;
      obs.y = obs.censored ? limit : *value;
    }

    if (options.log_transform) {
      if (std::isfinite(obs.ell)) {
        if (!(obs.ell > 0.0)) throw ParseError(lineno, "log transform needs a positive limit");
        obs.ell = std::log(obs.ell);
      }
      if (obs.y) {
        if (obs.censored) {
          obs.y = obs.ell;
        } else {
          if (!(*obs.y > 0.0))
            throw ParseError(lineno, "log transform needs a positive value (encode zeros as censored)");
          obs.y = std::log(*obs.y);
        }
      }
    }
    rows.push_back({date, obs});
  }
  if (rows.empty()) throw ValidationError("input has no data rows");

  DatedSeries out;
  out.start = rows.front().date;
  const auto n = static_cast<std::size_t>((rows.back().date - out.start).count()) + 1;
  std::vector<Observation> entries(n);
  for (std::size_t i = 0; i < n; ++i) entries[i].t = static_cast<int>(i) + 1;
  for (const auto& r : rows) {
    const auto i = static_cast<std::size_t>((r.date - out.start).count());
    Observation o = r.obs;
    o.t = static_cast<int>(i) + 1;
    entries[i] = o;
  }
  out.series = ObservationSeries(std::move(entries));
  return out;
}

DatedSeries ingest_file(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file '" + path + "'");
  return ingest(in, options);
}

}  // namespace scou::cli
