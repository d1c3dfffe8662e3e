#pragma once

#include <span>
#include <utility>
#include <vector>

#include "tfcc/congestion.hpp"
#include "tfcc/trust.hpp"

namespace tfcc {

// Queue sources at a parent: the parent's own traffic plus one entry per
// routing child. kLocalSource marks the parent's own queue.
inline constexpr NodeId kLocalSource = -1;

struct PriorityEntry {
  NodeId source = kLocalSource;
  double weight = 0.0;
};

// Entries sorted by descending weight, ties broken by lower node id. The
// local queue always carries the strictly highest weight.
struct PriorityAssignment {
  NodeId parent = -1;
  std::vector<PriorityEntry> entries;
};

// Local traffic outranks forwarded traffic; children rank by the trust the
// parent places in them, clamped just below the local weight.
PriorityAssignment assign_priorities(NodeId parent,
                                     std::span<const std::pair<NodeId, double>> children_trust);

struct RateGrant {
  NodeId source = kLocalSource;
  double rate = 0.0;  // packets per second
};

struct RateAllocation {
  NodeId parent = -1;
  double effective_capacity = 0.0;
  std::vector<RateGrant> grants;  // same order as the assignment
};

// Splits the damped capacity R * clamp(1 - damping, 0.1, 1) across the
// queues proportionally to their weights. The 0.1 floor keeps every queue
// draining even under the worst congestion report.
RateAllocation allocate_rates(const PriorityAssignment& assignment, double capacity_pps,
                              double damping);

// Per-interval rate adjustment from the parent-side queue occupancy:
// above threshold_max the rate halves, at or below threshold_min it grows
// additively by 1 packet/s up to the grant, in between it holds. The result
// never exceeds the grant.
double adjust_on_queue(double current_rate, const QueueState& queue, double grant);

}  // namespace tfcc
