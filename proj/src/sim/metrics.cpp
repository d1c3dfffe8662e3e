#include "tfcc/sim/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tfcc::sim {

const char* const kMetricsCsvHeader =
    "time_s,generated,delivered,dropped_overflow,dropped_malicious,dropped_noroute,"
    "in_flight,mean_latency_s,energy_units,normalized_throughput";

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kMetricsCsvHeader << '\n';
  for (const MetricsRow& row : rows) {
    out << format_double(row.time_s) << ',' << row.generated << ',' << row.delivered << ','
        << row.dropped_overflow << ',' << row.dropped_malicious << ',' << row.dropped_noroute << ','
        << row.in_flight << ',' << format_double(row.mean_latency_s) << ','
        << format_double(row.energy_units) << ',' << format_double(row.normalized_throughput)
        << '\n';
  }
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open \"" + path + "\" for writing");
  write_metrics_csv(out, rows);
  if (!out) throw std::runtime_error("failed while writing \"" + path + "\"");
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

[[noreturn]] void fail_field(const char* what, const std::string& text, const std::string& origin,
                             std::size_t line_no) {
  throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": bad " + what + " field \"" +
                           text + "\"");
}

double parse_double(const std::string& text, const std::string& origin, std::size_t line_no) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    fail_field("numeric", text, origin, line_no);
  }
  if (used != text.size()) fail_field("numeric", text, origin, line_no);
  return value;
}

std::int64_t parse_count(const std::string& text, const std::string& origin, std::size_t line_no) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    fail_field("counter", text, origin, line_no);
  }
  if (used != text.size() || value < 0) fail_field("counter", text, origin, line_no);
  return value;
}

}  // namespace

std::vector<MetricsRow> read_metrics_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(origin + ": empty metrics file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsCsvHeader)
    throw std::runtime_error(origin + ": unexpected metrics header \"" + line + "\"");

  std::vector<MetricsRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 10)
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": expected 10 fields, got " +
                               std::to_string(fields.size()));
    MetricsRow row;
    row.time_s = parse_double(fields[0], origin, line_no);
    row.generated = parse_count(fields[1], origin, line_no);
    row.delivered = parse_count(fields[2], origin, line_no);
    row.dropped_overflow = parse_count(fields[3], origin, line_no);
    row.dropped_malicious = parse_count(fields[4], origin, line_no);
    row.dropped_noroute = parse_count(fields[5], origin, line_no);
    row.in_flight = parse_count(fields[6], origin, line_no);
    row.mean_latency_s = parse_double(fields[7], origin, line_no);
    row.energy_units = parse_double(fields[8], origin, line_no);
    row.normalized_throughput = parse_double(fields[9], origin, line_no);
    rows.push_back(row);
  }
  return rows;
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open \"" + path + "\" for reading");
  return read_metrics_csv(in, path);
}

}  // namespace tfcc::sim
