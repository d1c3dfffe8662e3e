// Command line front end: run one scenario, run an experiment matrix, or
// validate a scenario file. Exit codes: 0 success, 1 execution/config error,
// 2 usage error.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "tfcc/sim/experiment.hpp"
#include "tfcc/sim/metrics.hpp"
#include "tfcc/sim/simulator.hpp"

namespace {

using namespace tfcc::sim;

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& warning : warnings) std::cerr << "warning: " << warning << '\n';
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open \"" + path.string() + "\" for writing");
  return out;
}

// Detail logs land next to the metrics file as <stem>.<aspect>.csv.
void write_detail_logs(const Simulator& sim, const std::filesystem::path& metrics_path) {
  std::filesystem::path base = metrics_path;
  base.replace_extension();

  {
    std::ofstream out = open_out(base.string() + ".trust.csv");
    out << "time_s,evaluator,subject,trust,trusted\n";
    for (const TrustLogRow& row : sim.trust_log())
      out << format_double(row.time_s) << ',' << row.evaluator << ',' << row.subject << ','
          << format_double(row.trust) << ',' << (row.trusted ? 1 : 0) << '\n';
  }
  {
    std::ofstream out = open_out(base.string() + ".routes.csv");
    out << "time_s,node,next_hop,hop_count,reachable\n";
    for (const RouteLogRow& row : sim.route_log())
      out << format_double(row.time_s) << ',' << row.node << ',' << row.next_hop << ','
          << row.hop_count << ',' << (row.reachable ? 1 : 0) << '\n';
  }
  {
    std::ofstream out = open_out(base.string() + ".congestion.csv");
    out << "time_s,node,congestion_index,damping\n";
    for (const CongestionLogRow& row : sim.congestion_log())
      out << format_double(row.time_s) << ',' << row.node << ','
          << format_double(row.congestion_index) << ',' << format_double(row.damping) << '\n';
  }
  {
    std::ofstream out = open_out(base.string() + ".rates.csv");
    out << "time_s,parent,source,rate_pps\n";
    for (const RateLogRow& row : sim.rate_log())
      out << format_double(row.time_s) << ',' << row.parent << ',' << row.source << ','
          << format_double(row.rate_pps) << '\n';
  }
}

int cmd_run(const std::string& scenario_path, std::uint64_t seed,
            const std::optional<std::string>& protocol, const std::string& out_path, bool detail) {
  ScenarioConfig config = ScenarioConfig::load_file(scenario_path);
  if (protocol) config.protocol = protocol_from_string(*protocol);

  SimOptions options;
  options.detail = detail;
  Simulator sim(config, seed, options);
  sim.run();
  print_warnings(sim.warnings());

  write_metrics_csv(out_path, sim.rows());
  if (detail) write_detail_logs(sim, out_path);

  const MetricsRow& last = sim.rows().back();
  std::cout << "wrote " << out_path << ": " << last.generated << " generated, " << last.delivered
            << " delivered, normalized throughput " << format_double(last.normalized_throughput)
            << '\n';
  return 0;
}

int cmd_experiment(const std::string& spec_path, const std::string& out_dir, int jobs) {
  const ExperimentSpec spec = ExperimentSpec::load_file(spec_path);
  const ExperimentResult result = run_experiment(spec, out_dir, jobs);
  print_warnings(result.warnings);
  std::cout << "wrote " << result.run_files.size() << " runs and summary.csv to " << out_dir
            << '\n';
  for (const VariantSummary& summary : result.summaries)
    std::cout << "  " << summary.variant << ": steady "
              << format_double(summary.mean_steady_normalized_throughput) << " (sd "
              << format_double(summary.stddev_steady_normalized_throughput) << "), final "
              << format_double(summary.mean_final_normalized_throughput) << '\n';
  return 0;
}

int cmd_validate(const std::string& scenario_path) {
  const ScenarioConfig config = ScenarioConfig::load_file(scenario_path);
  std::cout << scenario_path << ": valid (" << config.node_count << " nodes, "
            << to_string(config.protocol) << ", " << format_double(config.duration_s) << " s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trust-based congestion control network simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::uint64_t seed = 1;
  std::optional<std::string> protocol;
  bool detail = false;

  CLI::App* run = app.add_subcommand("run", "simulate one scenario and write a metrics CSV");
  run->add_option("--scenario", scenario_path, "scenario file")->required();
  run->add_option("--seed", seed, "random seed (default 1)");
  run->add_option("--protocol", protocol,
                  "override the scenario protocol (TFCC, NO_TRUST, NO_RATE_CONTROL)");
  run->add_option("--out", out_path, "metrics CSV path")->required();
  run->add_flag("--detail", detail, "also write <out stem>.{trust,routes,congestion,rates}.csv");

  std::string spec_path;
  std::string out_dir;
  int jobs = 1;

  CLI::App* experiment =
      app.add_subcommand("experiment", "run a variant/seed matrix and summarize it");
  experiment->add_option("--spec", spec_path, "experiment spec file")->required();
  experiment->add_option("--out", out_dir, "output directory")->required();
  experiment->add_option("--jobs", jobs, "max parallel runs (default 1)")
      ->check(CLI::PositiveNumber);

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "parse and validate a scenario file");
  validate->add_option("--scenario", validate_path, "scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& error) {
    app.exit(error);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(scenario_path, seed, protocol, out_path, detail);
    if (experiment->parsed()) return cmd_experiment(spec_path, out_dir, jobs);
    if (validate->parsed()) return cmd_validate(validate_path);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 1;
  }
  return 2;
}
