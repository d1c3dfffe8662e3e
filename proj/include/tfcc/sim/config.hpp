#pragma once

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tfcc/tables.hpp"

namespace tfcc::sim {

enum class Protocol {
  kTfcc,           // full protocol: trust + blocking + rate control
  kNoTrust,        // ablation: no trust evaluation or blocking, rate control stays on
  kNoRateControl,  // ablation: trust and blocking stay on, rate control off
};

std::string to_string(Protocol protocol);
Protocol protocol_from_string(const std::string& name);

enum class NodeBehavior { kBenevolent, kDropper, kFlooder, kDelayer };

std::string to_string(NodeBehavior behavior);
NodeBehavior behavior_from_string(const std::string& name);

// Explicit node placement for hand-built topologies. Behavior defaults to
// benevolent; the per-node attack knobs fall back to the scenario-wide values.
struct NodeSpec {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  NodeBehavior behavior = NodeBehavior::kBenevolent;
  std::optional<double> p_drop;
  std::optional<int> dup_factor;
  std::optional<double> extra_delay_s;
};

struct BehaviorMix {
  double dropper = 0.5;
  double flooder = 0.25;
  double delayer = 0.25;
};

struct ScenarioConfig {
  int node_count = 100;
  double field_width_m = 50.0;
  double field_height_m = 50.0;
  double radio_range_m = 12.0;

  double malicious_fraction = 0.5;
  bool exact_malicious_count = false;
  BehaviorMix behavior_mix;
  double p_drop = 0.9;
  int dup_factor = 3;
  double extra_delay_s = 0.5;

  double trust_threshold = 0.5;
  double initial_trust = 0.55;
  int window_packets = 100;
  double window_seconds = 5.0;

  double epsilon = 0.05;
  int queue_capacity = 40;
  double c_min_fraction = 0.25;
  double c_max_fraction = 0.85;

  double traffic_rate_pps = 2.0;
  double link_rate_pps = 50.0;
  double packet_size_units = 1.0;
  double control_frame_units = 0.1;

  double e_tx = 2.0;
  double e_rx = 1.0;
  double battery_full = 1e5;

  double duration_s = 120.0;
  double control_interval_s = 1.0;

  Protocol protocol = Protocol::kTfcc;

  // Empty means sampled placement: sink 0 at field center, the rest uniform.
  std::vector<NodeSpec> nodes;

  // Null means the bundled membership functions and rule tables.
  nlohmann::json fuzzy_tables = nullptr;

  int queue_threshold_min() const;
  int queue_threshold_max() const;
  std::shared_ptr<const FuzzyTables> tables() const;

  // Parses a scenario document. Blank input yields the defaults; unknown keys
  // and out-of-range values are rejected with the offending key in the message.
  static ScenarioConfig from_json_text(const std::string& text);
  static ScenarioConfig from_json(const nlohmann::json& doc);
  static ScenarioConfig load_file(const std::string& path);

  nlohmann::json to_json() const;
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tfcc::sim
