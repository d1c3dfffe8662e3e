#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tfcc::sim {

// One sample of the run-wide counters, taken once per control interval.
// Counters are cumulative from t = 0; in_flight is the instantaneous number
// of live packets; normalized_throughput is delivered / generated so far.
struct MetricsRow {
  double time_s = 0.0;
  std::int64_t generated = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped_overflow = 0;
  std::int64_t dropped_malicious = 0;
  std::int64_t dropped_noroute = 0;
  std::int64_t in_flight = 0;
  double mean_latency_s = 0.0;
  double energy_units = 0.0;
  double normalized_throughput = 0.0;
};

extern const char* const kMetricsCsvHeader;

std::string format_double(double value);  // shortest round-ish form, %.10g

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

// Rejects files whose header does not match kMetricsCsvHeader exactly.
std::vector<MetricsRow> read_metrics_csv(std::istream& in, const std::string& origin = "<stream>");
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

}  // namespace tfcc::sim
