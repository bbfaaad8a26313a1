#pragma once

#include <chrono>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scou/model.hpp"

namespace scou::cli {

// Parse failure carrying the 1-based line of the offending row.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct IngestOptions {
  bool log_transform = false;
};

struct DatedSeries {
  std::chrono::sys_days start{};
  ObservationSeries series;

  std::chrono::sys_days date(std::size_t index) const { return start + std::chrono::days(index); }
};

std::chrono::sys_days parse_date(const std::string& text);
std::string format_date(std::chrono::sys_days day);

// Reads `date,value,limit[,censored]`. Missing calendar days become
// unobserved entries.
DatedSeries ingest(std::istream& in, const IngestOptions& options = {});
DatedSeries ingest_file(const std::string& path, const IngestOptions& options = {});

}  // namespace scou::cli
