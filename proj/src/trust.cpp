#include "tfcc/trust.hpp"

#include <algorithm>
#include <cmath>

namespace tfcc {

TrustMetrics compute_trust_metrics(const LinkStatsWindow& window, double battery_now,
                                   double battery_full) {
  if (window.packets_sent <= 0) throw DormantLinkError();
  if (!(battery_full > 0.0))
    throw std::invalid_argument("trust metrics: full battery must be positive");

  TrustMetrics m;
  const double ratio =
      static_cast<double>(window.acks_received) / static_cast<double>(window.packets_sent);
  if (ratio > 1.0) {
    m.overflow = true;
    m.transmission_ratio = 0.0;
  } else {
    m.transmission_ratio = ratio;
  }

  if (window.acks_received <= 0) {
    // No acknowledgement came back: treat the delay as unbounded (axis cap).
    m.latency_ratio = 3.0;
  } else if (window.neighbourhood_latency_s <= 0.0) {
    m.latency_ratio = 1.0;
  } else {
    m.latency_ratio = std::clamp(window.subject_latency_s / window.neighbourhood_latency_s, 0.0, 3.0);
  }

  m.energy_ratio = std::clamp(battery_now / battery_full, 0.0, 1.0);
  return m;
}

double evaluate_trust(const TrustMetrics& metrics, const FuzzyTables& tables) {
  const MembershipVector inputs[3] = {
      fuzzify(tables.transmission, metrics.overflow ? 0.0 : metrics.transmission_ratio),
      fuzzify(tables.latency, metrics.latency_ratio),
      fuzzify(tables.energy, metrics.energy_ratio),
  };
  const MembershipVector fired = tables.trust_rules.infer(inputs);
  return defuzzify_centroid(tables.trust, fired);
}

LinkClassification classify_links(std::span<const TrustRecord> records, double trust_threshold) {
  if (!(trust_threshold >= 0.0 && trust_threshold <= 1.0))
    throw std::invalid_argument("classify links: threshold must be in [0, 1]");
  LinkClassification out;
  for (const TrustRecord& r : records) {
    const DirectedLink link{r.subject, r.evaluator, r.trust};
    if (r.trust >= trust_threshold - kTrustEps)
      out.trusted.push_back(link);
    else
      out.untrusted.push_back(link);
  }
  return out;
}

bool find_malicious(NodeId node, std::span<const DirectedLink> trusted_links,
                    std::span<const NodeId> known_nodes) {
  if (std::find(known_nodes.begin(), known_nodes.end(), node) == known_nodes.end())
    throw std::invalid_argument("find malicious: unknown node id " + std::to_string(node));
  for (const DirectedLink& link : trusted_links)
    if (link.subject == node) return false;
  return true;
}

TrustManager::TrustManager(Options options, std::shared_ptr<const FuzzyTables> tables,
                           std::function<std::pair<double, double>(NodeId)> battery_lookup)
    : options_(options), tables_(std::move(tables)), battery_lookup_(std::move(battery_lookup)) {
  if (!(options_.initial_trust >= 0.0 && options_.initial_trust <= 1.0))
    throw std::invalid_argument("trust manager: initial trust must be in [0, 1]");
  if (options_.window_packets < 1 || !(options_.window_seconds > 0.0))
    throw std::invalid_argument("trust manager: window bounds must be positive");
}

bool TrustManager::frozen(NodeId node) const {
  return node >= 0 && static_cast<std::size_t>(node) < frozen_.size() && frozen_[node];
}

void TrustManager::register_link(NodeId evaluator, NodeId subject, double now_s) {
  const auto key = std::make_pair(evaluator, subject);
  if (records_.contains(key)) return;
  records_[key] = TrustRecord{evaluator, subject, options_.initial_trust,
                              options_.initial_trust >= options_.trust_threshold - kTrustEps,
                              now_s};
  windows_[key] = Window{now_s, 0, 0, 0.0, 0};
}

void TrustManager::note_transmission(NodeId evaluator, NodeId subject) {
  auto it = windows_.find({evaluator, subject});
  if (it != windows_.end()) ++it->second.packets_sent;
}

void TrustManager::note_ack(NodeId evaluator, NodeId subject, double latency_s,
                            double sent_at_s) {
  auto it = windows_.find({evaluator, subject});
  if (it == windows_.end()) return;
  if (sent_at_s < it->second.start_s) return;  // belongs to an already-closed window
  ++it->second.acks_received;
  it->second.latency_sum_s += latency_s;
  ++it->second.latency_count;
}

void TrustManager::note_unmatched_ack(NodeId evaluator, NodeId subject) {
  auto it = windows_.find({evaluator, subject});
  if (it != windows_.end()) ++it->second.acks_received;
}

void TrustManager::freeze_node(NodeId node) {
  if (node < 0) return;
  if (static_cast<std::size_t>(node) >= frozen_.size()) frozen_.resize(node + 1, false);
  frozen_[node] = true;
}

void TrustManager::roll_windows(double now_s) {
  // Snapshot the per-evaluator latency pools before any window resets so the
  // neighbourhood reference is the same no matter the processing order.
  struct Pool {
    double sum = 0.0;
    long count = 0;
  };
  std::map<NodeId, Pool> pools;
  for (const auto& [key, window] : windows_) {
    if (frozen(key.first) || frozen(key.second)) continue;
    Pool& pool = pools[key.first];
    pool.sum += window.latency_sum_s;
    pool.count += window.latency_count;
  }

  for (auto& [key, window] : windows_) {
    const auto [evaluator, subject] = key;
    if (frozen(evaluator) || frozen(subject)) continue;
    const bool due = (now_s - window.start_s >= options_.window_seconds) ||
                     (window.packets_sent >= options_.window_packets);
    if (!due) continue;

    if (window.packets_sent > 0) {
      LinkStatsWindow stats;
      stats.evaluator = evaluator;
      stats.subject = subject;
      stats.packets_sent = window.packets_sent;
      stats.acks_received = window.acks_received;
      stats.subject_latency_s =
          window.latency_count > 0 ? window.latency_sum_s / window.latency_count : 0.0;
      stats.window_start_s = window.start_s;
      stats.window_end_s = now_s;

      const Pool& pool = pools[evaluator];
      const double other_sum = pool.sum - window.latency_sum_s;
      const long other_count = pool.count - window.latency_count;
      stats.neighbourhood_latency_s = other_count > 0 ? other_sum / other_count : 0.0;

      const auto [battery_now, battery_full] = battery_lookup_(subject);
      const TrustMetrics metrics = compute_trust_metrics(stats, battery_now, battery_full);
      const double value = evaluate_trust(metrics, *tables_);

      TrustRecord& record = records_[key];
      record.trust = value;
      record.trusted = value >= options_.trust_threshold - kTrustEps;
      record.last_update_s = now_s;
      record.evaluated = true;
      completed_[key] = stats;
    }
    window = Window{now_s, 0, 0, 0.0, 0};
  }
}

double TrustManager::trust(NodeId evaluator, NodeId subject) const {
  auto it = records_.find({evaluator, subject});
  if (it == records_.end())
    throw std::invalid_argument("trust manager: unregistered link " + std::to_string(evaluator) +
                                " -> " + std::to_string(subject));
  return it->second.trust;
}

std::vector<TrustRecord> TrustManager::active_records() const {
  std::vector<TrustRecord> out;
  out.reserve(records_.size());
  for (const auto& [key, record] : records_)
    if (!frozen(key.first) && !frozen(key.second)) out.push_back(record);
  return out;
}

bool TrustManager::presumption_stale(const TrustRecord& record, double now_s) const {
  return !record.evaluated && now_s - record.last_update_s >= options_.window_seconds;
}

LinkClassification TrustManager::classify(double trust_threshold, double now_s) const {
  if (!(trust_threshold >= 0.0 && trust_threshold <= 1.0))
    throw std::invalid_argument("classify links: threshold must be in [0, 1]");
  LinkClassification out;
  for (const TrustRecord& r : active_records()) {
    const DirectedLink link{r.subject, r.evaluator, r.trust};
    if (r.trust >= trust_threshold - kTrustEps && !presumption_stale(r, now_s))
      out.trusted.push_back(link);
    else
      out.untrusted.push_back(link);
  }
  return out;
}

}  // namespace tfcc
