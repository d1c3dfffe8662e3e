#include "tfcc/rate_control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tfcc {

PriorityAssignment assign_priorities(NodeId parent,
                                     std::span<const std::pair<NodeId, double>> children_trust) {
  PriorityAssignment out;
  out.parent = parent;
  out.entries.push_back(PriorityEntry{kLocalSource, 1.0});
  for (const auto& [child, trust] : children_trust) {
    if (child == parent || child == kLocalSource)
      throw std::invalid_argument("priorities: child id collides with parent or local marker");
    if (!(trust >= 0.0 && trust <= 1.0))
      throw std::invalid_argument("priorities: child trust must be in [0, 1]");
    out.entries.push_back(PriorityEntry{child, std::min(trust, 0.99)});
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const PriorityEntry& a, const PriorityEntry& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.source < b.source;
  });
  return out;
}

RateAllocation allocate_rates(const PriorityAssignment& assignment, double capacity_pps,
                              double damping) {
  if (!(capacity_pps > 0.0)) throw std::invalid_argument("rates: capacity must be positive");
  if (!(damping >= 0.0 && damping <= 1.0))
    throw std::invalid_argument("rates: damping must be in [0, 1]");
  if (assignment.entries.empty()) throw std::invalid_argument("rates: empty assignment");

  double weight_sum = 0.0;
  for (const PriorityEntry& e : assignment.entries) {
    if (!(e.weight > 0.0)) throw std::invalid_argument("rates: weights must be positive");
    weight_sum += e.weight;
  }

  RateAllocation out;
  out.parent = assignment.parent;
  out.effective_capacity = capacity_pps * std::clamp(1.0 - damping, 0.1, 1.0);
  out.grants.reserve(assignment.entries.size());
  for (const PriorityEntry& e : assignment.entries)
    out.grants.push_back(RateGrant{e.source, out.effective_capacity * e.weight / weight_sum});
  return out;
}

double adjust_on_queue(double current_rate, const QueueState& queue, double grant) {
  if (!(current_rate >= 0.0) || !(grant >= 0.0))
    throw std::invalid_argument("rate adjust: rates must be non-negative");
  if (queue.occupancy < 0 || !(queue.threshold_min < queue.threshold_max))
    throw std::invalid_argument("rate adjust: malformed queue state");

  double rate = current_rate;
  if (queue.occupancy > queue.threshold_max)
    rate = current_rate / 2.0;
  else if (queue.occupancy <= queue.threshold_min)
    rate = current_rate + 1.0;
  return std::min(rate, grant);
}

}  // namespace tfcc
