#include "tfcc/sim/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tfcc/sim/metrics.hpp"

using namespace tfcc::sim;
namespace fs = std::filesystem;

namespace {

nlohmann::json tiny_scenario() {
  // Sink, relay, source in a line; short run so experiment tests stay fast.
  nlohmann::json nodes = nlohmann::json::array();
  nodes.push_back({{"id", 0}, {"x", 0.0}, {"y", 0.0}, {"behavior", "benevolent"}});
  nodes.push_back({{"id", 1}, {"x", 8.0}, {"y", 0.0}, {"behavior", "benevolent"}});
  nodes.push_back({{"id", 2}, {"x", 16.0}, {"y", 0.0}, {"behavior", "benevolent"}});
  return {
      {"field_width_m", 20.0}, {"field_height_m", 4.0}, {"radio_range_m", 10.0},
      {"traffic_rate_pps", 3.0}, {"duration_s", 12.0},  {"nodes", nodes},
      {"node_count", 3},
  };
}

nlohmann::json tiny_spec_doc() {
  return {
      {"scenario", tiny_scenario()},
      {"variants",
       nlohmann::json::array({{{"name", "full"}, {"protocol", "TFCC"}},
                              {{"name", "fast"},
                               {"protocol", "NO_TRUST"},
                               {"overrides", {{"traffic_rate_pps", 5.0}}}}})},
      {"seeds", nlohmann::json::array({3, 4})},
      {"warmup_s", 4.0},
  };
}

fs::path fresh_dir(const std::string& leaf) {
  fs::path dir = fs::temp_directory_path() / "tfcc_tests" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("experiment spec parses, merges overrides, and validates eagerly") {
  const ExperimentSpec spec = ExperimentSpec::from_json(tiny_spec_doc());
  REQUIRE(spec.variants.size() == 2);
  CHECK(spec.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(spec.warmup_s == 4.0);

  const ScenarioConfig full = spec.variant_config(0);
  CHECK(full.protocol == Protocol::kTfcc);
  CHECK(full.traffic_rate_pps == 3.0);

  const ScenarioConfig fast = spec.variant_config(1);
  CHECK(fast.protocol == Protocol::kNoTrust);
  CHECK(fast.traffic_rate_pps == 5.0);
  CHECK(fast.node_count == 3);
}

TEST_CASE("experiment spec rejects malformed documents") {
  nlohmann::json doc = tiny_spec_doc();
  doc["mystery"] = 1;
  CHECK_THROWS_WITH_AS(ExperimentSpec::from_json(doc), doctest::Contains("mystery"), ConfigError);

  doc = tiny_spec_doc();
  doc["variants"][1]["name"] = "full";
  CHECK_THROWS_WITH_AS(ExperimentSpec::from_json(doc), doctest::Contains("duplicate"), ConfigError);

  doc = tiny_spec_doc();
  doc["variants"][0]["name"] = "bad name";
  CHECK_THROWS_AS(ExperimentSpec::from_json(doc), ConfigError);

  doc = tiny_spec_doc();
  doc["seeds"] = {3, 3};
  CHECK_THROWS_WITH_AS(ExperimentSpec::from_json(doc), doctest::Contains("duplicate"), ConfigError);

  doc = tiny_spec_doc();
  doc["variants"][0]["protocol"] = "MAGIC";
  CHECK_THROWS_AS(ExperimentSpec::from_json(doc), ConfigError);

  // A broken override surfaces at parse time, tagged with the variant name.
  doc = tiny_spec_doc();
  doc["variants"][1]["overrides"]["traffic_rate_pps"] = -1.0;
  CHECK_THROWS_WITH_AS(ExperimentSpec::from_json(doc), doctest::Contains("fast"), ConfigError);
}

TEST_CASE("experiment spec resolves a scenario path against the spec directory") {
  const fs::path dir = fresh_dir("spec_paths");
  {
    std::ofstream out(dir / "base.scenario");
    out << tiny_scenario().dump(2) << '\n';
  }
  nlohmann::json doc = tiny_spec_doc();
  doc["scenario"] = "base.scenario";
  {
    std::ofstream out(dir / "exp.json");
    out << doc.dump(2) << '\n';
  }
  const ExperimentSpec spec = ExperimentSpec::load_file((dir / "exp.json").string());
  CHECK(spec.variant_config(0).node_count == 3);

  nlohmann::json missing = tiny_spec_doc();
  missing["scenario"] = "nowhere.scenario";
  CHECK_THROWS_WITH_AS(ExperimentSpec::from_json(missing, dir.string()),
                       doctest::Contains("nowhere"), ConfigError);
}

TEST_CASE("run_experiment writes per-run files and a recomputable summary") {
  const ExperimentSpec spec = ExperimentSpec::from_json(tiny_spec_doc());
  const fs::path dir = fresh_dir("run_basic");
  const ExperimentResult result = run_experiment(spec, dir.string(), 2);

  REQUIRE(result.run_files ==
          std::vector<std::string>{"full_seed3.csv", "full_seed4.csv", "fast_seed3.csv",
                                   "fast_seed4.csv"});
  for (const std::string& file : result.run_files) CHECK(fs::exists(dir / file));
  REQUIRE(fs::exists(dir / "summary.csv"));

  REQUIRE(result.summaries.size() == 2);
  for (const VariantSummary& summary : result.summaries) {
    CHECK(summary.runs == 2);
    CHECK(summary.mean_final_normalized_throughput > 0.0);
    CHECK(summary.mean_final_normalized_throughput <= 1.0);
  }

  // Recompute the "full" summary straight from the files it points at.
  std::vector<double> finals;
  std::vector<double> steadies;
  for (const std::string file : {"full_seed3.csv", "full_seed4.csv"}) {
    const std::vector<MetricsRow> rows = read_metrics_csv((dir / file).string());
    REQUIRE_FALSE(rows.empty());
    finals.push_back(rows.back().normalized_throughput);
    const MetricsRow* base = nullptr;
    for (const MetricsRow& row : rows)
      if (row.time_s <= spec.warmup_s) base = &row;
    REQUIRE(base != nullptr);
    steadies.push_back(static_cast<double>(rows.back().delivered - base->delivered) /
                       static_cast<double>(rows.back().generated - base->generated));
  }
  const double mean_final = (finals[0] + finals[1]) / 2.0;
  const double stddev_final = std::sqrt((finals[0] - mean_final) * (finals[0] - mean_final) +
                                        (finals[1] - mean_final) * (finals[1] - mean_final));
  const double mean_steady = (steadies[0] + steadies[1]) / 2.0;
  const VariantSummary& full = result.summaries[0];
  CHECK(full.variant == "full");
  CHECK(std::abs(full.mean_final_normalized_throughput - mean_final) < 1e-12);
  CHECK(std::abs(full.stddev_final_normalized_throughput - stddev_final) < 1e-12);
  CHECK(std::abs(full.mean_steady_normalized_throughput - mean_steady) < 1e-12);

  // The written summary matches the returned one byte for byte.
  std::ostringstream expected;
  write_summary_csv(expected, result.summaries);
  CHECK(slurp(dir / "summary.csv") == expected.str());
}

TEST_CASE("experiments are byte-identical across reruns and thread counts") {
  const ExperimentSpec spec = ExperimentSpec::from_json(tiny_spec_doc());
  const fs::path serial = fresh_dir("run_serial");
  const fs::path threaded = fresh_dir("run_threaded");
  run_experiment(spec, serial.string(), 1);
  run_experiment(spec, threaded.string(), 4);

  std::vector<std::string> files = {"full_seed3.csv", "full_seed4.csv", "fast_seed3.csv",
                                    "fast_seed4.csv", "summary.csv"};
  for (const std::string& file : files) CHECK(slurp(serial / file) == slurp(threaded / file));
}

TEST_CASE("single-run variants report zero spread") {
  nlohmann::json doc = tiny_spec_doc();
  doc["seeds"] = nlohmann::json::array({9});
  const ExperimentSpec spec = ExperimentSpec::from_json(doc);
  const fs::path dir = fresh_dir("run_single");
  const ExperimentResult result = run_experiment(spec, dir.string(), 1);
  REQUIRE(result.summaries.size() == 2);
  for (const VariantSummary& summary : result.summaries) {
    CHECK(summary.runs == 1);
    CHECK(summary.stddev_final_normalized_throughput == 0.0);
    CHECK(summary.stddev_steady_normalized_throughput == 0.0);
  }
}
