#include "tfcc/congestion.hpp"

#include <cmath>

namespace tfcc {

double queue_congestion(const QueueState& queue, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("queue congestion: epsilon must be in (0, 1)");
  if (queue.capacity < 1 || queue.occupancy < 0 || queue.occupancy > queue.capacity)
    throw std::invalid_argument("queue congestion: occupancy outside [0, capacity]");
  if (!(queue.threshold_min < queue.threshold_max) || queue.threshold_min < 0 ||
      queue.threshold_max > queue.capacity)
    throw std::invalid_argument("queue congestion: thresholds must satisfy 0 <= min < max <= capacity");

  if (queue.occupancy <= queue.threshold_min) return epsilon;
  if (queue.occupancy >= queue.threshold_max) return 1.0;
  const double span = static_cast<double>(queue.threshold_max - queue.threshold_min);
  const double position = static_cast<double>(queue.occupancy - queue.threshold_min);
  return (1.0 - epsilon) * position / span + epsilon;
}

CongestionIndex aggregate_congestion(std::span<const double> per_queue) {
  if (per_queue.empty())
    throw std::invalid_argument("congestion aggregate: need at least one queue");
  // Log-domain product keeps the result stable for many queues.
  double log_sum = 0.0;
  for (double ik : per_queue) {
    if (!(ik > 0.0 && ik <= 1.0))
      throw std::invalid_argument("congestion aggregate: per-queue values must be in (0, 1]");
    if (ik == 1.0) return CongestionIndex{0.0, 1.0};
    log_sum += std::log1p(-ik);
  }
  const double complement = std::exp(log_sum / static_cast<double>(per_queue.size()));
  return CongestionIndex{complement, 1.0 - complement};
}

double congestion_damping(double congestion_index, const MembershipVector& trust_membership,
                          const FuzzyTables& tables) {
  if (trust_membership.partition != &tables.trust)
    throw std::invalid_argument("damping metric: trust membership is over the wrong partition");
  if (trust_membership.degrees.size() != tables.trust.size())
    throw std::invalid_argument("damping metric: trust membership size mismatch");

  // Keep only the mass on the benevolent (top) trust labels, renormalized.
  const std::size_t keep = tables.benevolent_trust.size();
  const std::size_t offset = tables.trust.size() - keep;
  MembershipVector benevolent{&tables.benevolent_trust, std::vector<double>(keep, 0.0)};
  double mass = 0.0;
  for (std::size_t i = 0; i < keep; ++i) {
    benevolent.degrees[i] = trust_membership.degrees[offset + i];
    mass += benevolent.degrees[i];
  }
  if (mass <= 0.0) throw NotBenevolentError();
  for (double& d : benevolent.degrees) d /= mass;

  const MembershipVector inputs[2] = {fuzzify(tables.congestion, congestion_index),
                                      std::move(benevolent)};
  const MembershipVector fired = tables.damping_rules.infer(inputs);
  return defuzzify_centroid(tables.damping, fired);
}

}  // namespace tfcc
