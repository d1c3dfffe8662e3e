#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tfcc/tables.hpp"

namespace tfcc {

using NodeId = int;

// Trust values are centroids of fuzzy sets; a value meant to sit exactly on
// the threshold can land an ulp under it. Every threshold comparison is
// inclusive within this tolerance.
inline constexpr double kTrustEps = 1e-9;

// One completed observation window held by `evaluator` about `subject`.
// The evaluator counts its own transmissions toward the subject and the
// acknowledgements the subject returned for them.
struct LinkStatsWindow {
  NodeId evaluator = -1;
  NodeId subject = -1;
  long packets_sent = 0;                // evaluator -> subject, data and probes
  long acks_received = 0;               // subject -> evaluator
  double subject_latency_s = 0.0;       // mean ack round trip attributed to subject
  double neighbourhood_latency_s = 0.0; // mean ack round trip of the evaluator's other subjects
  double window_start_s = 0.0;
  double window_end_s = 0.0;
};

// Crisp inputs to the trust evaluation. When `overflow` is set the subject
// acknowledged more than it was sent (duplication misbehaviour) and the
// transmission ratio is forced to 0 for the fuzzifier.
struct TrustMetrics {
  double transmission_ratio = 0.0;  // in [0, 1] unless overflow forced it to 0
  double latency_ratio = 0.0;       // subject latency / neighbourhood latency, clamped to [0, 3]
  double energy_ratio = 0.0;        // subject battery remaining / full, in [0, 1]
  bool overflow = false;
};

// Directed trust held about `subject` by `evaluator`. Until the first
// non-dormant window completes the value is pure presumption (the configured
// initial trust) and `evaluated` stays false.
struct TrustRecord {
  NodeId evaluator = -1;
  NodeId subject = -1;
  double trust = 0.0;
  bool trusted = false;
  double last_update_s = 0.0;
  bool evaluated = false;
};

// A directed link in the subject -> evaluator orientation: it exists for
// forwarding purposes when the evaluator trusts the subject.
struct DirectedLink {
  NodeId subject = -1;
  NodeId evaluator = -1;
  double trust = 0.0;
};

struct LinkClassification {
  std::vector<DirectedLink> trusted;
  std::vector<DirectedLink> untrusted;
};

// Raised when a window carries no transmissions at all: there is no evidence,
// so the trust record must stay unchanged for that window.
class DormantLinkError : public std::runtime_error {
 public:
  DormantLinkError() : std::runtime_error("dormant link: no packets sent in window") {}
};

// Derives the crisp trust inputs from a completed window and the subject's
// battery level. Throws DormantLinkError when packets_sent == 0. A window
// with zero acknowledgements pins the latency ratio at the axis cap: silence
// is indistinguishable from unbounded delay. A neighbourhood latency of zero
// (no other subjects reported) yields the neutral ratio 1.
TrustMetrics compute_trust_metrics(const LinkStatsWindow& window, double battery_now,
                                   double battery_full);

// Fuzzifies the metrics, fires the trust rules, and defuzzifies to a crisp
// trust value in [0, 1].
double evaluate_trust(const TrustMetrics& metrics, const FuzzyTables& tables = default_tables());

// Splits records into trusted / untrusted directed links. The threshold is
// inclusive within kTrustEps: trust == threshold is trusted even if the
// stored centroid is an ulp under. Threshold must be in [0, 1].
LinkClassification classify_links(std::span<const TrustRecord> records, double trust_threshold);

// A node is malicious exactly when no evaluator trusts it: it appears as the
// subject of zero trusted links. Nodes with no links at all (isolated) are
// malicious by vacuous quantification. Throws for ids absent from `known_nodes`.
bool find_malicious(NodeId node, std::span<const DirectedLink> trusted_links,
                    std::span<const NodeId> known_nodes);

// Stateful per-directed-link window accounting shared by the simulator.
//
// Links are registered up front (one per directed one-hop pair); each starts
// at the configured initial trust so new links may carry traffic while
// evidence accumulates. Windows roll when they reach the packet budget or
// the time span, whichever comes first; dormant windows leave the record
// untouched. Pairs with a frozen endpoint (blocked node) stop rolling.
class TrustManager {
 public:
  struct Options {
    double initial_trust = 0.55;
    double trust_threshold = 0.5;
    long window_packets = 100;
    double window_seconds = 5.0;
  };

  // battery_lookup(node) -> {battery_now, battery_full} for the subject side.
  TrustManager(Options options, std::shared_ptr<const FuzzyTables> tables,
               std::function<std::pair<double, double>(NodeId)> battery_lookup);

  void register_link(NodeId evaluator, NodeId subject, double now_s);
  void note_transmission(NodeId evaluator, NodeId subject);
  // `sent_at_s` is when the acknowledged transmission was noted. An ack for a
  // transmission from an already-closed window is discarded: it was counted
  // as unanswered there, and crediting it now would let ack totals overrun
  // the send totals of honest links. Callers that do not track send times
  // credit the current window unconditionally.
  void note_ack(NodeId evaluator, NodeId subject, double latency_s,
                double sent_at_s = std::numeric_limits<double>::infinity());
  // Counts an acknowledgement that matches no outstanding transmission (a
  // duplicate). It contributes no latency sample but inflates the ack count,
  // which is exactly how duplication misbehaviour becomes visible.
  void note_unmatched_ack(NodeId evaluator, NodeId subject);
  void freeze_node(NodeId node);

  // Completes every due window and refreshes the affected records.
  void roll_windows(double now_s);

  double trust(NodeId evaluator, NodeId subject) const;
  const std::map<std::pair<NodeId, NodeId>, TrustRecord>& records() const { return records_; }

  // Last completed non-dormant window per directed pair, for diagnostics.
  const std::map<std::pair<NodeId, NodeId>, LinkStatsWindow>& completed_windows() const {
    return completed_;
  }

  std::vector<TrustRecord> active_records() const;  // frozen endpoints excluded

  // A presumption record (never evaluated) expires once a full window has
  // passed without evidence: a peer that produced no observable behaviour in
  // that long does not deserve the benefit of the doubt any more. Evaluated
  // records never go stale; their value is the evidence.
  bool presumption_stale(const TrustRecord& record, double now_s) const;

  // Splits the active records by the threshold, forcing stale presumption
  // records into the untrusted bucket regardless of their stored value.
  LinkClassification classify(double trust_threshold, double now_s) const;

 private:
  struct Window {
    double start_s = 0.0;
    long packets_sent = 0;
    long acks_received = 0;
    double latency_sum_s = 0.0;
    long latency_count = 0;
  };

  Options options_;
  std::shared_ptr<const FuzzyTables> tables_;
  std::function<std::pair<double, double>(NodeId)> battery_lookup_;
  std::map<std::pair<NodeId, NodeId>, Window> windows_;
  std::map<std::pair<NodeId, NodeId>, TrustRecord> records_;
  std::map<std::pair<NodeId, NodeId>, LinkStatsWindow> completed_;
  std::vector<bool> frozen_;

  bool frozen(NodeId node) const;
};

}  // namespace tfcc
