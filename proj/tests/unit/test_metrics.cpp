#include "tfcc/sim/metrics.hpp"

#include <doctest.h>

#include <sstream>

using namespace tfcc::sim;

namespace {

MetricsRow sample_row() {
  MetricsRow row;
  row.time_s = 1.5;
  row.generated = 100;
  row.delivered = 42;
  row.dropped_overflow = 3;
  row.dropped_malicious = 7;
  row.dropped_noroute = 1;
  row.in_flight = 47;
  row.mean_latency_s = 0.12345678901234;
  row.energy_units = 1234.5;
  row.normalized_throughput = 0.42;
  return row;
}

}  // namespace

TEST_CASE("metrics csv round-trips exactly") {
  std::vector<MetricsRow> rows{sample_row()};
  rows.push_back(sample_row());
  rows[1].time_s = 2.5;
  rows[1].delivered = 43;
  rows[1].normalized_throughput = 0.43;

  std::ostringstream out;
  write_metrics_csv(out, rows);
  const std::string text = out.str();
  CHECK(text.substr(0, text.find('\n')) == kMetricsCsvHeader);

  std::istringstream in(text);
  const std::vector<MetricsRow> back = read_metrics_csv(in, "buffer");
  REQUIRE(back.size() == 2);
  CHECK(back[0].time_s == rows[0].time_s);
  CHECK(back[0].generated == rows[0].generated);
  CHECK(back[0].mean_latency_s == doctest::Approx(rows[0].mean_latency_s).epsilon(1e-9));
  CHECK(back[1].delivered == 43);
  CHECK(back[1].normalized_throughput == doctest::Approx(0.43));
}

TEST_CASE("reader rejects a wrong header and malformed rows") {
  std::istringstream bad_header("time_s,generated\n");
  CHECK_THROWS_WITH_AS(read_metrics_csv(bad_header, "x"), doctest::Contains("header"),
                       std::runtime_error);

  std::istringstream short_row(std::string(kMetricsCsvHeader) + "\n1,2,3\n");
  CHECK_THROWS_AS(read_metrics_csv(short_row, "x"), std::runtime_error);

  std::istringstream bad_number(std::string(kMetricsCsvHeader) +
                                "\n0,zero,0,0,0,0,0,0,0,0\n");
  CHECK_THROWS_WITH_AS(read_metrics_csv(bad_number, "x"), doctest::Contains("x:2"),
                       std::runtime_error);

  std::istringstream negative(std::string(kMetricsCsvHeader) +
                              "\n0,-5,0,0,0,0,0,0,0,0\n");
  CHECK_THROWS_AS(read_metrics_csv(negative, "x"), std::runtime_error);
}

TEST_CASE("reader tolerates trailing newline and CRLF endings") {
  std::ostringstream out;
  write_metrics_csv(out, {sample_row()});
  std::string text = out.str();
  std::string crlf;
  for (char c : text) {
    if (c == '\n') crlf += "\r\n";
    else crlf += c;
  }
  std::istringstream in(crlf);
  const std::vector<MetricsRow> back = read_metrics_csv(in, "crlf");
  REQUIRE(back.size() == 1);
  CHECK(back[0].generated == 100);
}

TEST_CASE("format_double keeps ten significant digits") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.12345678901234) == "0.123456789");
}
