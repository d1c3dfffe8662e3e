#pragma once

#include <span>
#include <stdexcept>

#include "tfcc/tables.hpp"

namespace tfcc {

// Occupancy snapshot of one bounded queue with its congestion thresholds
// expressed in packets.
struct QueueState {
  int occupancy = 0;
  int capacity = 1;
  int threshold_min = 0;  // below or at: effectively uncongested
  int threshold_max = 1;  // above: saturated
};

// Per-queue congestion in [epsilon, 1]: epsilon at or below threshold_min,
// 1 at or above threshold_max, linear in between. Epsilon keeps the node
// aggregate sensitive to queues that are technically empty but present.
double queue_congestion(const QueueState& queue, double epsilon);

// Node aggregate over all of the node's queues.
struct CongestionIndex {
  double complement = 1.0;  // geometric mean of per-queue complements
  double index = 0.0;       // 1 - complement
};

// Geometric mean of (1 - I_k) over the per-queue congestion values. Any
// saturated queue (I_k == 1) forces the node index to 1.
CongestionIndex aggregate_congestion(std::span<const double> per_queue);

// Raised when the trust membership carries no mass in the benevolent labels:
// the damping metric is only defined for nodes that are at least moderately
// trusted, and callers must decide their own fallback.
class NotBenevolentError : public std::runtime_error {
 public:
  NotBenevolentError()
      : std::runtime_error("damping metric: no trust mass in the benevolent labels") {}
};

// The rate-damping metric in [0, 1]: fuzzifies the node congestion index,
// drops the non-benevolent portion of the trust membership, renormalizes the
// remainder, fires the damping rules, and defuzzifies. `trust_membership`
// must be over `tables.trust`.
double congestion_damping(double congestion_index, const MembershipVector& trust_membership,
                          const FuzzyTables& tables = default_tables());

}  // namespace tfcc
