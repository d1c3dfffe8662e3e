#include "tfcc/sim/experiment.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <thread>

#include "tfcc/sim/metrics.hpp"
#include "tfcc/sim/simulator.hpp"

namespace tfcc::sim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw ConfigError(message); }

bool safe_name(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  }
  return true;
}

json load_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) fail(std::string("cannot open ") + what + " file \"" + path + "\"");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& error) {
    fail("\"" + path + "\" is not valid JSON: " + error.what());
  }
}

struct RunStats {
  double final_throughput = 0.0;
  double steady_throughput = 0.0;
};

RunStats stats_from_rows(const std::vector<MetricsRow>& rows, double warmup_s,
                         const std::string& origin) {
  if (rows.empty()) fail("\"" + origin + "\" holds no metrics rows");
  RunStats stats;
  const MetricsRow& last = rows.back();
  stats.final_throughput = last.normalized_throughput;

  const MetricsRow* baseline = nullptr;
  for (const MetricsRow& row : rows) {
    if (row.time_s <= warmup_s) baseline = &row;
  }
  const std::int64_t base_generated = baseline ? baseline->generated : 0;
  const std::int64_t base_delivered = baseline ? baseline->delivered : 0;
  const std::int64_t generated = last.generated - base_generated;
  const std::int64_t delivered = last.delivered - base_delivered;
  stats.steady_throughput =
      generated > 0 ? static_cast<double>(delivered) / static_cast<double>(generated) : 0.0;
  return stats;
}

// Sample mean and standard deviation (n-1 denominator, 0 for n < 2).
std::pair<double, double> mean_stddev(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double squares = 0.0;
  for (double v : values) squares += (v - mean) * (v - mean);
  return {mean, std::sqrt(squares / static_cast<double>(values.size() - 1))};
}

}  // namespace

const char* const kSummaryCsvHeader =
    "variant,runs,mean_final_normalized_throughput,stddev_final_normalized_throughput,"
    "mean_steady_normalized_throughput,stddev_steady_normalized_throughput";

ExperimentSpec ExperimentSpec::from_json(const json& doc, const std::string& base_dir) {
  if (!doc.is_object()) fail("experiment spec must be a JSON object");
  for (const auto& item : doc.items()) {
    if (item.key() != "scenario" && item.key() != "variants" && item.key() != "seeds" &&
        item.key() != "warmup_s")
      fail("unknown key \"" + item.key() + "\" in experiment spec");
  }

  ExperimentSpec spec;
  if (!doc.contains("scenario")) fail("experiment spec is missing \"scenario\"");
  const json& scenario = doc.at("scenario");
  if (scenario.is_string()) {
    std::filesystem::path path = scenario.get<std::string>();
    if (path.is_relative() && !base_dir.empty()) path = std::filesystem::path(base_dir) / path;
    spec.base = load_json_file(path.string(), "scenario");
  } else if (scenario.is_object()) {
    spec.base = scenario;
  } else {
    fail("\"scenario\" must be a path string or an inline scenario object");
  }

  if (!doc.contains("variants")) fail("experiment spec is missing \"variants\"");
  const json& variants = doc.at("variants");
  if (!variants.is_array() || variants.empty()) fail("\"variants\" must be a non-empty array");
  std::set<std::string> names;
  for (const json& entry : variants) {
    if (!entry.is_object()) fail("variants[] entry must be a JSON object");
    for (const auto& item : entry.items()) {
      if (item.key() != "name" && item.key() != "protocol" && item.key() != "overrides")
        fail("unknown key \"" + item.key() + "\" in variants[] entry");
    }
    ExperimentVariant variant;
    if (!entry.contains("name") || !entry.at("name").is_string())
      fail("variants[] entry needs a string \"name\"");
    variant.name = entry.at("name").get<std::string>();
    if (!safe_name(variant.name))
      fail("variant name \"" + variant.name + "\" must use only letters, digits, '_' or '-'");
    if (!names.insert(variant.name).second) fail("duplicate variant name \"" + variant.name + "\"");
    if (entry.contains("protocol")) {
      if (!entry.at("protocol").is_string()) fail("variants[].protocol must be a string");
      variant.protocol = protocol_from_string(entry.at("protocol").get<std::string>());
    }
    if (entry.contains("overrides")) {
      if (!entry.at("overrides").is_object()) fail("variants[].overrides must be a JSON object");
      variant.overrides = entry.at("overrides");
    }
    spec.variants.push_back(std::move(variant));
  }

  if (!doc.contains("seeds")) fail("experiment spec is missing \"seeds\"");
  const json& seeds = doc.at("seeds");
  if (!seeds.is_array() || seeds.empty()) fail("\"seeds\" must be a non-empty array");
  std::set<std::uint64_t> seen_seeds;
  for (const json& entry : seeds) {
    if (!entry.is_number_unsigned() && !(entry.is_number_integer() && entry.get<std::int64_t>() >= 0))
      fail("\"seeds\" entries must be non-negative integers");
    const std::uint64_t seed = entry.get<std::uint64_t>();
    if (!seen_seeds.insert(seed).second)
      fail("\"seeds\" contains duplicate seed " + std::to_string(seed));
    spec.seeds.push_back(seed);
  }

  if (doc.contains("warmup_s")) {
    if (!doc.at("warmup_s").is_number()) fail("\"warmup_s\" must be a number");
    spec.warmup_s = doc.at("warmup_s").get<double>();
    if (spec.warmup_s < 0.0) fail("\"warmup_s\" must be non-negative");
  }

  for (std::size_t i = 0; i < spec.variants.size(); ++i) {
    try {
      spec.variant_config(i);
    } catch (const std::exception& error) {
      fail("variant \"" + spec.variants[i].name + "\": " + error.what());
    }
  }
  return spec;
}

ExperimentSpec ExperimentSpec::from_json_text(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& error) {
    fail(std::string("experiment spec is not valid JSON: ") + error.what());
  }
  return from_json(doc, base_dir);
}

ExperimentSpec ExperimentSpec::load_file(const std::string& path) {
  const json doc = load_json_file(path, "experiment spec");
  return from_json(doc, std::filesystem::path(path).parent_path().string());
}

ScenarioConfig ExperimentSpec::variant_config(std::size_t index) const {
  const ExperimentVariant& variant = variants.at(index);
  json doc = base;
  if (!variant.overrides.is_null()) doc.merge_patch(variant.overrides);
  doc["protocol"] = to_string(variant.protocol);
  return ScenarioConfig::from_json(doc);
}

void write_summary_csv(std::ostream& out, const std::vector<VariantSummary>& rows) {
  out << kSummaryCsvHeader << '\n';
  for (const VariantSummary& row : rows) {
    out << row.variant << ',' << row.runs << ','
        << format_double(row.mean_final_normalized_throughput) << ','
        << format_double(row.stddev_final_normalized_throughput) << ','
        << format_double(row.mean_steady_normalized_throughput) << ','
        << format_double(row.stddev_steady_normalized_throughput) << '\n';
  }
}

void write_summary_csv(const std::string& path, const std::vector<VariantSummary>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open \"" + path + "\" for writing");
  write_summary_csv(out, rows);
  if (!out) fail("failed while writing \"" + path + "\"");
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const std::string& out_dir, int jobs) {
  if (spec.variants.empty()) fail("experiment spec has no variants");
  if (spec.seeds.empty()) fail("experiment spec has no seeds");
  std::filesystem::create_directories(out_dir);

  struct Task {
    std::size_t variant = 0;
    std::uint64_t seed = 0;
    std::string file;  // relative to out_dir
  };
  std::vector<Task> tasks;
  for (std::size_t vi = 0; vi < spec.variants.size(); ++vi) {
    for (std::uint64_t seed : spec.seeds) {
      tasks.push_back(
          {vi, seed, spec.variants[vi].name + "_seed" + std::to_string(seed) + ".csv"});
    }
  }

  // Validated configs are materialized once; workers copy per run.
  std::vector<ScenarioConfig> configs;
  configs.reserve(spec.variants.size());
  for (std::size_t vi = 0; vi < spec.variants.size(); ++vi) configs.push_back(spec.variant_config(vi));

  std::vector<std::vector<std::string>> task_warnings(tasks.size());
  std::vector<std::exception_ptr> task_errors(tasks.size());
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (;;) {
      const std::size_t index = next.fetch_add(1);
      if (index >= tasks.size()) return;
      const Task& task = tasks[index];
      try {
        Simulator sim(configs[task.variant], task.seed);
        sim.run();
        write_metrics_csv((std::filesystem::path(out_dir) / task.file).string(), sim.rows());
        for (const std::string& warning : sim.warnings()) {
          task_warnings[index].push_back(spec.variants[task.variant].name + " seed " +
                                         std::to_string(task.seed) + ": " + warning);
        }
      } catch (...) {
        task_errors[index] = std::current_exception();
      }
    }
  };

  const int hardware = static_cast<int>(std::thread::hardware_concurrency());
  const int lanes = std::max(1, std::min({jobs < 1 ? 1 : jobs, static_cast<int>(tasks.size()),
                                          hardware > 0 ? hardware : 1}));
  if (lanes == 1) {
    worker();
  } else {
    std::vector<std::future<void>> futures;
    futures.reserve(static_cast<std::size_t>(lanes));
    for (int i = 0; i < lanes; ++i) futures.push_back(std::async(std::launch::async, worker));
    for (std::future<void>& future : futures) future.get();
  }
  for (const std::exception_ptr& error : task_errors) {
    if (error) std::rethrow_exception(error);
  }

  // Summaries come from the files, not the in-memory rows: what is reported is
  // provably what was written.
  ExperimentResult result;
  std::size_t task_index = 0;
  for (std::size_t vi = 0; vi < spec.variants.size(); ++vi) {
    std::vector<double> finals;
    std::vector<double> steadies;
    for (std::size_t si = 0; si < spec.seeds.size(); ++si, ++task_index) {
      const Task& task = tasks[task_index];
      const std::string path = (std::filesystem::path(out_dir) / task.file).string();
      const RunStats stats = stats_from_rows(read_metrics_csv(path), spec.warmup_s, path);
      finals.push_back(stats.final_throughput);
      steadies.push_back(stats.steady_throughput);
      result.run_files.push_back(task.file);
      for (std::string& warning : task_warnings[task_index])
        result.warnings.push_back(std::move(warning));
    }
    VariantSummary summary;
    summary.variant = spec.variants[vi].name;
    summary.runs = static_cast<int>(spec.seeds.size());
    std::tie(summary.mean_final_normalized_throughput,
             summary.stddev_final_normalized_throughput) = mean_stddev(finals);
    std::tie(summary.mean_steady_normalized_throughput,
             summary.stddev_steady_normalized_throughput) = mean_stddev(steadies);
    result.summaries.push_back(std::move(summary));
  }

  write_summary_csv((std::filesystem::path(out_dir) / "summary.csv").string(), result.summaries);
  return result;
}

}  // namespace tfcc::sim
