#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tfcc/sim/config.hpp"
#include "tfcc/sim/metrics.hpp"
#include "tfcc/trust.hpp"

namespace tfcc::sim {

using tfcc::NodeId;

struct SimOptions {
  bool detail = false;  // collect per-interval trust/route/congestion/rate rows
};

// Per-node facts frozen at the end of a run.
struct NodeSummary {
  NodeId id = -1;
  double x = 0.0;
  double y = 0.0;
  NodeBehavior behavior = NodeBehavior::kBenevolent;
  bool blocked = false;
  double blocked_at_s = -1.0;  // negative: never blocked
  bool reachable = false;
  double battery = 0.0;
  std::int64_t tx_events = 0;
  std::int64_t rx_events = 0;
  double last_tx_s = -1.0;  // negative: never transmitted
};

// One per node per control interval: how many queues the node held and how
// many of them sat above the saturation threshold at sampling time.
struct QueuePressureSample {
  double time_s = 0.0;
  NodeId node = -1;
  int queues = 0;
  int above_max = 0;
};

struct TrustLogRow {
  double time_s = 0.0;
  NodeId evaluator = -1;
  NodeId subject = -1;
  double trust = 0.0;
  bool trusted = false;
};

struct RouteLogRow {
  double time_s = 0.0;
  NodeId node = -1;
  NodeId next_hop = -1;
  int hop_count = 0;
  bool reachable = false;
};

struct CongestionLogRow {
  double time_s = 0.0;
  NodeId node = -1;
  double congestion_index = 0.0;
  double damping = 0.0;
};

struct RateLogRow {
  double time_s = 0.0;
  NodeId parent = -1;
  NodeId source = -1;  // kLocalSource for the parent's own queue
  double rate_pps = 0.0;
};

// Deterministic event-driven simulation of one scenario under one seed.
// Identical (config, seed, options) always reproduce identical results,
// including across protocol ablations sharing placement and traffic.
class Simulator {
 public:
  Simulator(ScenarioConfig config, std::uint64_t seed, SimOptions options = {});
  ~Simulator();

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  void run();

  const std::vector<MetricsRow>& rows() const;
  std::vector<NodeSummary> node_summaries() const;
  const std::vector<QueuePressureSample>& queue_pressure() const;
  const std::vector<TrustLogRow>& trust_log() const;
  const std::vector<RouteLogRow>& route_log() const;
  const std::vector<CongestionLogRow>& congestion_log() const;
  const std::vector<RateLogRow>& rate_log() const;
  const std::vector<std::string>& warnings() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tfcc::sim
