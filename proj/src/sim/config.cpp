#include "tfcc/sim/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tfcc::sim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw ConfigError(message); }

void require_object(const json& value, const std::string& where) {
  if (!value.is_object()) fail(where + " must be a JSON object");
}

void reject_unknown_keys(const json& object, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : object.items()) {
    if (!known.count(item.key())) fail("unknown key \"" + item.key() + "\" in " + where);
  }
}

double get_number(const json& object, const std::string& key, double fallback) {
  if (!object.contains(key)) return fallback;
  const json& value = object.at(key);
  if (!value.is_number()) fail("\"" + key + "\" must be a number");
  return value.get<double>();
}

int get_int(const json& object, const std::string& key, int fallback) {
  if (!object.contains(key)) return fallback;
  const json& value = object.at(key);
  if (!value.is_number_integer()) fail("\"" + key + "\" must be an integer");
  return value.get<int>();
}

bool get_bool(const json& object, const std::string& key, bool fallback) {
  if (!object.contains(key)) return fallback;
  const json& value = object.at(key);
  if (!value.is_boolean()) fail("\"" + key + "\" must be a boolean");
  return value.get<bool>();
}

std::string get_string(const json& object, const std::string& key, const std::string& fallback) {
  if (!object.contains(key)) return fallback;
  const json& value = object.at(key);
  if (!value.is_string()) fail("\"" + key + "\" must be a string");
  return value.get<std::string>();
}

void check_range(double value, double lo, double hi, const std::string& key) {
  if (!(value >= lo && value <= hi)) {
    std::ostringstream out;
    out << "\"" << key << "\" must be in [" << lo << ", " << hi << "], got " << value;
    fail(out.str());
  }
}

void check_positive(double value, const std::string& key) {
  if (!(value > 0.0)) fail("\"" + key + "\" must be positive");
}

NodeSpec node_from_json(const json& value, const ScenarioConfig& config) {
  require_object(value, "nodes[] entry");
  reject_unknown_keys(value, {"id", "x", "y", "behavior", "p_drop", "dup_factor", "extra_delay_s"},
                      "nodes[] entry");
  if (!value.contains("id")) fail("nodes[] entry is missing \"id\"");
  NodeSpec node;
  node.id = get_int(value, "id", 0);
  node.x = get_number(value, "x", 0.0);
  node.y = get_number(value, "y", 0.0);
  node.behavior = behavior_from_string(get_string(value, "behavior", "benevolent"));
  if (value.contains("p_drop")) node.p_drop = get_number(value, "p_drop", config.p_drop);
  if (value.contains("dup_factor")) node.dup_factor = get_int(value, "dup_factor", config.dup_factor);
  if (value.contains("extra_delay_s")) node.extra_delay_s = get_number(value, "extra_delay_s", config.extra_delay_s);
  return node;
}

json node_to_json(const NodeSpec& node) {
  json value;
  value["id"] = node.id;
  value["x"] = node.x;
  value["y"] = node.y;
  value["behavior"] = to_string(node.behavior);
  if (node.p_drop) value["p_drop"] = *node.p_drop;
  if (node.dup_factor) value["dup_factor"] = *node.dup_factor;
  if (node.extra_delay_s) value["extra_delay_s"] = *node.extra_delay_s;
  return value;
}

}  // namespace

std::string to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::kTfcc: return "TFCC";
    case Protocol::kNoTrust: return "NO_TRUST";
    case Protocol::kNoRateControl: return "NO_RATE_CONTROL";
  }
  fail("invalid protocol value");
}

Protocol protocol_from_string(const std::string& name) {
  if (name == "TFCC") return Protocol::kTfcc;
  if (name == "NO_TRUST") return Protocol::kNoTrust;
  if (name == "NO_RATE_CONTROL") return Protocol::kNoRateControl;
  fail("unknown protocol \"" + name + "\" (expected TFCC, NO_TRUST, or NO_RATE_CONTROL)");
}

std::string to_string(NodeBehavior behavior) {
  switch (behavior) {
    case NodeBehavior::kBenevolent: return "benevolent";
    case NodeBehavior::kDropper: return "dropper";
    case NodeBehavior::kFlooder: return "flooder";
    case NodeBehavior::kDelayer: return "delayer";
  }
  fail("invalid behavior value");
}

NodeBehavior behavior_from_string(const std::string& name) {
  if (name == "benevolent") return NodeBehavior::kBenevolent;
  if (name == "dropper") return NodeBehavior::kDropper;
  if (name == "flooder") return NodeBehavior::kFlooder;
  if (name == "delayer") return NodeBehavior::kDelayer;
  fail("unknown behavior \"" + name + "\" (expected benevolent, dropper, flooder, or delayer)");
}

int ScenarioConfig::queue_threshold_min() const {
  return static_cast<int>(std::llround(queue_capacity * c_min_fraction));
}

int ScenarioConfig::queue_threshold_max() const {
  return static_cast<int>(std::llround(queue_capacity * c_max_fraction));
}

std::shared_ptr<const FuzzyTables> ScenarioConfig::tables() const {
  if (fuzzy_tables.is_null()) return FuzzyTables::bundled();
  try {
    return FuzzyTables::from_json(fuzzy_tables);
  } catch (const std::exception& error) {
    fail(std::string("invalid \"fuzzy_tables\": ") + error.what());
  }
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
  bool blank = true;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      blank = false;
      break;
    }
  }
  if (blank) {
    ScenarioConfig config;
    config.validate();
    return config;
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& error) {
    fail(std::string("scenario is not valid JSON: ") + error.what());
  }
  return from_json(doc);
}

ScenarioConfig ScenarioConfig::from_json(const json& doc) {
  require_object(doc, "scenario");
  reject_unknown_keys(doc,
                      {"node_count", "field_width_m", "field_height_m", "radio_range_m",
                       "malicious_fraction", "exact_malicious_count", "behavior_mix", "p_drop",
                       "dup_factor", "extra_delay_s", "trust_threshold", "initial_trust",
                       "window_packets", "window_seconds", "epsilon", "queue_capacity",
                       "c_min_fraction", "c_max_fraction", "traffic_rate_pps", "link_rate_pps",
                       "packet_size_units", "control_frame_units", "e_tx", "e_rx", "battery_full",
                       "duration_s", "control_interval_s", "protocol", "nodes", "fuzzy_tables"},
                      "scenario");

  ScenarioConfig config;
  config.node_count = get_int(doc, "node_count", config.node_count);
  config.field_width_m = get_number(doc, "field_width_m", config.field_width_m);
  config.field_height_m = get_number(doc, "field_height_m", config.field_height_m);
  config.radio_range_m = get_number(doc, "radio_range_m", config.radio_range_m);
  config.malicious_fraction = get_number(doc, "malicious_fraction", config.malicious_fraction);
  config.exact_malicious_count = get_bool(doc, "exact_malicious_count", config.exact_malicious_count);
  if (doc.contains("behavior_mix")) {
    const json& mix = doc.at("behavior_mix");
    require_object(mix, "\"behavior_mix\"");
    reject_unknown_keys(mix, {"dropper", "flooder", "delayer"}, "\"behavior_mix\"");
    config.behavior_mix.dropper = get_number(mix, "dropper", config.behavior_mix.dropper);
    config.behavior_mix.flooder = get_number(mix, "flooder", config.behavior_mix.flooder);
    config.behavior_mix.delayer = get_number(mix, "delayer", config.behavior_mix.delayer);
  }
  config.p_drop = get_number(doc, "p_drop", config.p_drop);
  config.dup_factor = get_int(doc, "dup_factor", config.dup_factor);
  config.extra_delay_s = get_number(doc, "extra_delay_s", config.extra_delay_s);
  config.trust_threshold = get_number(doc, "trust_threshold", config.trust_threshold);
  config.initial_trust = get_number(doc, "initial_trust", config.initial_trust);
  config.window_packets = get_int(doc, "window_packets", config.window_packets);
  config.window_seconds = get_number(doc, "window_seconds", config.window_seconds);
  config.epsilon = get_number(doc, "epsilon", config.epsilon);
  config.queue_capacity = get_int(doc, "queue_capacity", config.queue_capacity);
  config.c_min_fraction = get_number(doc, "c_min_fraction", config.c_min_fraction);
  config.c_max_fraction = get_number(doc, "c_max_fraction", config.c_max_fraction);
  config.traffic_rate_pps = get_number(doc, "traffic_rate_pps", config.traffic_rate_pps);
  config.link_rate_pps = get_number(doc, "link_rate_pps", config.link_rate_pps);
  config.packet_size_units = get_number(doc, "packet_size_units", config.packet_size_units);
  config.control_frame_units = get_number(doc, "control_frame_units", config.control_frame_units);
  config.e_tx = get_number(doc, "e_tx", config.e_tx);
  config.e_rx = get_number(doc, "e_rx", config.e_rx);
  config.battery_full = get_number(doc, "battery_full", config.battery_full);
  config.duration_s = get_number(doc, "duration_s", config.duration_s);
  config.control_interval_s = get_number(doc, "control_interval_s", config.control_interval_s);
  config.protocol = protocol_from_string(get_string(doc, "protocol", to_string(config.protocol)));
  if (doc.contains("nodes")) {
    const json& nodes = doc.at("nodes");
    if (!nodes.is_array()) fail("\"nodes\" must be an array");
    for (const json& entry : nodes) config.nodes.push_back(node_from_json(entry, config));
    config.node_count = static_cast<int>(config.nodes.size());
  }
  if (doc.contains("fuzzy_tables")) config.fuzzy_tables = doc.at("fuzzy_tables");

  config.validate();
  return config;
}

ScenarioConfig ScenarioConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open scenario file \"" + path + "\"");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

nlohmann::json ScenarioConfig::to_json() const {
  json doc;
  doc["node_count"] = node_count;
  doc["field_width_m"] = field_width_m;
  doc["field_height_m"] = field_height_m;
  doc["radio_range_m"] = radio_range_m;
  doc["malicious_fraction"] = malicious_fraction;
  doc["exact_malicious_count"] = exact_malicious_count;
  doc["behavior_mix"] = {{"dropper", behavior_mix.dropper},
                         {"flooder", behavior_mix.flooder},
                         {"delayer", behavior_mix.delayer}};
  doc["p_drop"] = p_drop;
  doc["dup_factor"] = dup_factor;
  doc["extra_delay_s"] = extra_delay_s;
  doc["trust_threshold"] = trust_threshold;
  doc["initial_trust"] = initial_trust;
  doc["window_packets"] = window_packets;
  doc["window_seconds"] = window_seconds;
  doc["epsilon"] = epsilon;
  doc["queue_capacity"] = queue_capacity;
  doc["c_min_fraction"] = c_min_fraction;
  doc["c_max_fraction"] = c_max_fraction;
  doc["traffic_rate_pps"] = traffic_rate_pps;
  doc["link_rate_pps"] = link_rate_pps;
  doc["packet_size_units"] = packet_size_units;
  doc["control_frame_units"] = control_frame_units;
  doc["e_tx"] = e_tx;
  doc["e_rx"] = e_rx;
  doc["battery_full"] = battery_full;
  doc["duration_s"] = duration_s;
  doc["control_interval_s"] = control_interval_s;
  doc["protocol"] = to_string(protocol);
  if (!nodes.empty()) {
    json list = json::array();
    for (const NodeSpec& node : nodes) list.push_back(node_to_json(node));
    doc["nodes"] = list;
  }
  if (!fuzzy_tables.is_null()) doc["fuzzy_tables"] = fuzzy_tables;
  return doc;
}

void ScenarioConfig::validate() const {
  if (node_count < 2) fail("\"node_count\" must be at least 2 (sink plus one sensor)");
  check_positive(field_width_m, "field_width_m");
  check_positive(field_height_m, "field_height_m");
  check_positive(radio_range_m, "radio_range_m");
  check_range(malicious_fraction, 0.0, 1.0, "malicious_fraction");
  if (behavior_mix.dropper < 0 || behavior_mix.flooder < 0 || behavior_mix.delayer < 0)
    fail("\"behavior_mix\" shares must be non-negative");
  if (behavior_mix.dropper + behavior_mix.flooder + behavior_mix.delayer <= 0.0)
    fail("\"behavior_mix\" shares must not all be zero");
  check_range(p_drop, 0.0, 1.0, "p_drop");
  if (dup_factor < 1) fail("\"dup_factor\" must be at least 1");
  if (extra_delay_s < 0.0) fail("\"extra_delay_s\" must be non-negative");
  check_range(trust_threshold, 0.0, 1.0, "trust_threshold");
  check_range(initial_trust, 0.0, 1.0, "initial_trust");
  if (window_packets < 1) fail("\"window_packets\" must be at least 1");
  check_positive(window_seconds, "window_seconds");
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail("\"epsilon\" must be strictly between 0 and 1");
  if (queue_capacity < 2) fail("\"queue_capacity\" must be at least 2");
  check_range(c_min_fraction, 0.0, 1.0, "c_min_fraction");
  check_range(c_max_fraction, 0.0, 1.0, "c_max_fraction");
  if (queue_threshold_min() >= queue_threshold_max())
    fail("\"c_min_fraction\" must resolve below \"c_max_fraction\"");
  if (queue_threshold_max() > queue_capacity)
    fail("\"c_max_fraction\" must resolve within the queue capacity");
  if (traffic_rate_pps < 0.0) fail("\"traffic_rate_pps\" must be non-negative");
  check_positive(link_rate_pps, "link_rate_pps");
  check_positive(packet_size_units, "packet_size_units");
  if (control_frame_units < 0.0) fail("\"control_frame_units\" must be non-negative");
  if (e_tx < 0.0) fail("\"e_tx\" must be non-negative");
  if (e_rx < 0.0) fail("\"e_rx\" must be non-negative");
  check_positive(battery_full, "battery_full");
  check_positive(duration_s, "duration_s");
  check_positive(control_interval_s, "control_interval_s");
  if (control_interval_s > duration_s) fail("\"control_interval_s\" must not exceed \"duration_s\"");

  if (!nodes.empty()) {
    if (node_count != static_cast<int>(nodes.size()))
      fail("\"node_count\" must match the explicit \"nodes\" list");
    std::set<int> seen;
    for (const NodeSpec& node : nodes) {
      if (node.id < 0 || node.id >= static_cast<int>(nodes.size()))
        fail("\"nodes\" ids must form a contiguous range starting at 0");
      if (!seen.insert(node.id).second) fail("\"nodes\" contains a duplicate id");
      if (node.p_drop) check_range(*node.p_drop, 0.0, 1.0, "nodes[].p_drop");
      if (node.dup_factor && *node.dup_factor < 1) fail("\"nodes[].dup_factor\" must be at least 1");
      if (node.extra_delay_s && *node.extra_delay_s < 0.0)
        fail("\"nodes[].extra_delay_s\" must be non-negative");
    }
    if (!seen.count(0)) fail("\"nodes\" must include the sink (id 0)");
    const NodeSpec* sink = nullptr;
    for (const NodeSpec& node : nodes)
      if (node.id == 0) sink = &node;
    if (sink && sink->behavior != NodeBehavior::kBenevolent) fail("the sink (id 0) must be benevolent");
  }

  if (!fuzzy_tables.is_null()) tables();
}

}  // namespace tfcc::sim
