#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfcc/sim/config.hpp"

namespace tfcc::sim {

// One protocol arm of a comparison. `overrides` is an RFC 7386 merge patch
// applied on top of the base scenario before the protocol is pinned, so a
// variant can also tweak rates, thresholds, or the node list.
struct ExperimentVariant {
  std::string name;
  Protocol protocol = Protocol::kTfcc;
  nlohmann::json overrides;
};

struct ExperimentSpec {
  nlohmann::json base = nlohmann::json::object();  // the shared scenario document
  std::vector<ExperimentVariant> variants;
  std::vector<std::uint64_t> seeds;
  double warmup_s = 20.0;

  // Accepted document shape:
  //   {"scenario": "relative/path.scenario" | {...inline object...},
  //    "variants": [{"name": "...", "protocol": "...", "overrides": {...}}, ...],
  //    "seeds": [1, 2, ...],
  //    "warmup_s": 20.0}
  // A scenario given as a path is resolved against `base_dir` (load_file passes
  // the spec file's own directory). Every variant is validated eagerly.
  static ExperimentSpec from_json(const nlohmann::json& doc, const std::string& base_dir = {});
  static ExperimentSpec from_json_text(const std::string& text, const std::string& base_dir = {});
  static ExperimentSpec load_file(const std::string& path);

  // The fully merged, validated scenario for one variant.
  ScenarioConfig variant_config(std::size_t index) const;
};

struct VariantSummary {
  std::string variant;
  int runs = 0;
  double mean_final_normalized_throughput = 0.0;
  double stddev_final_normalized_throughput = 0.0;
  double mean_steady_normalized_throughput = 0.0;
  double stddev_steady_normalized_throughput = 0.0;
};

struct ExperimentResult {
  std::vector<VariantSummary> summaries;  // variant order of the spec
  std::vector<std::string> run_files;     // paths relative to out_dir, variant-major
  std::vector<std::string> warnings;      // simulator warnings, tagged "variant seed N: ..."
};

extern const char* const kSummaryCsvHeader;

// Runs every variant under every seed, writing <name>_seed<N>.csv per run plus
// summary.csv into out_dir (created if missing). Runs execute on up to `jobs`
// threads; outputs are byte-identical regardless of jobs. The summary is
// computed by reading the run files back, so it reflects what was written.
//
// Per run, "final" is the last row's normalized_throughput and "steady" is the
// delivered/generated ratio accumulated strictly after warmup_s (the delta
// between the last row and the latest row at or before the warmup boundary).
// Across runs of one variant the summary reports mean and sample standard
// deviation (n-1; zero for a single run).
ExperimentResult run_experiment(const ExperimentSpec& spec, const std::string& out_dir,
                                int jobs = 1);

void write_summary_csv(std::ostream& out, const std::vector<VariantSummary>& rows);
void write_summary_csv(const std::string& path, const std::vector<VariantSummary>& rows);

}  // namespace tfcc::sim
