#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "tfcc/trust.hpp"

using namespace tfcc;

TEST_CASE("trust metrics derive the three crisp ratios") {
  LinkStatsWindow w;
  w.evaluator = 7;
  w.subject = 3;
  w.packets_sent = 10;
  w.acks_received = 9;
  w.subject_latency_s = 0.8;
  w.neighbourhood_latency_s = 1.0;

  const TrustMetrics m = compute_trust_metrics(w, 2.7, 3.0);
  CHECK(m.transmission_ratio == doctest::Approx(0.9));
  CHECK(m.latency_ratio == doctest::Approx(0.8));
  CHECK(m.energy_ratio == doctest::Approx(0.9));
  CHECK_FALSE(m.overflow);
}

TEST_CASE("more acks than transmissions flags overflow and zeroes the ratio") {
  LinkStatsWindow w;
  w.packets_sent = 10;
  w.acks_received = 15;
  w.subject_latency_s = 0.5;
  w.neighbourhood_latency_s = 0.5;
  const TrustMetrics m = compute_trust_metrics(w, 1.0, 1.0);
  CHECK(m.overflow);
  CHECK(m.transmission_ratio == 0.0);
  CHECK(m.latency_ratio == doctest::Approx(1.0));
}

TEST_CASE("silent subjects count as maximally delayed") {
  LinkStatsWindow w;
  w.packets_sent = 20;
  w.acks_received = 0;
  w.neighbourhood_latency_s = 0.4;
  const TrustMetrics m = compute_trust_metrics(w, 1.0, 1.0);
  CHECK(m.transmission_ratio == 0.0);
  CHECK(m.latency_ratio == 3.0);
}

TEST_CASE("latency ratio is neutral without a neighbourhood and clamps at the cap") {
  LinkStatsWindow w;
  w.packets_sent = 10;
  w.acks_received = 10;
  w.subject_latency_s = 2.0;
  w.neighbourhood_latency_s = 0.0;
  CHECK(compute_trust_metrics(w, 1.0, 1.0).latency_ratio == doctest::Approx(1.0));

  w.neighbourhood_latency_s = 0.1;  // ratio 20, clamps to 3
  CHECK(compute_trust_metrics(w, 1.0, 1.0).latency_ratio == 3.0);
}

TEST_CASE("dormant windows and bad batteries are rejected") {
  LinkStatsWindow w;
  w.packets_sent = 0;
  CHECK_THROWS_AS(compute_trust_metrics(w, 1.0, 1.0), DormantLinkError);
  w.packets_sent = 5;
  CHECK_THROWS_AS(compute_trust_metrics(w, 1.0, 0.0), std::invalid_argument);
  CHECK(compute_trust_metrics(w, 5.0, 1.0).energy_ratio == 1.0);  // clamped
  CHECK(compute_trust_metrics(w, -1.0, 1.0).energy_ratio == 0.0);
}

TEST_CASE("trust evaluation lands on the expected plateaus") {
  // Good sender, average latency, healthy battery: the high-trust shape alone.
  CHECK(std::abs(evaluate_trust({0.9, 0.8, 0.9, false}) - 0.8621212) < 1e-3);
  // Complete packet loss with a drained-looking ratio: very low trust.
  CHECK(std::abs(evaluate_trust({0.0, 3.0, 0.9, false}) - 0.2127451) < 1e-3);
  // Good sender but clearly slower than the neighbourhood: capped at low trust.
  CHECK(std::abs(evaluate_trust({1.0, 2.0, 0.9, false}) - 0.5) < 1e-3);
  // Weak sender with decent latency: medium trust.
  CHECK(std::abs(evaluate_trust({0.2, 0.8, 0.9, false}) - 0.65) < 1e-3);
}

TEST_CASE("trust rises with the transmission ratio, modulo the top-crossover dip") {
  // Inside the M/H handover both labels fire the same high-trust consequent,
  // so its max-aggregated degree dips to 0.5 at the midpoint and the clipped
  // right-shoulder centroid dips with it (about 0.006 deep). That dip is
  // inherent to min/max aggregation; outside the handover the sweep is
  // strictly non-decreasing.
  double prev = -1.0;
  double prev_alpha = -1.0;
  for (int i = 0; i <= 200; ++i) {
    const double alpha = i / 200.0;
    const double value = evaluate_trust({alpha, 0.8, 0.9, false});
    const bool in_dip = prev_alpha > 0.7 - 1e-12 && alpha < 0.75 + 1e-12;
    CHECK(value >= prev - (in_dip ? 0.0061 : 1e-9));
    prev = value;
    prev_alpha = alpha;
  }
  CHECK(std::abs(evaluate_trust({0.0, 0.8, 0.9, false}) - 0.65) < 1e-3);
  CHECK(std::abs(evaluate_trust({1.0, 0.8, 0.9, false}) - 0.8621212) < 1e-3);
  CHECK(std::abs(evaluate_trust({0.725, 0.8, 0.9, false}) - 0.8561601) < 1e-3);
}

TEST_CASE("a drained battery caps trust regardless of the other inputs") {
  for (double alpha : {0.0, 0.3, 0.7, 1.0}) {
    for (double tau : {0.2, 0.8, 1.5, 3.0}) {
      for (double beta : {0.0, 0.2, 0.4, 0.55}) {
        INFO("alpha=", alpha, " tau=", tau, " beta=", beta);
        CHECK(evaluate_trust({alpha, tau, beta, false}) < 0.45);
      }
    }
  }
}

TEST_CASE("overflowed windows evaluate as untrustworthy") {
  const double value = evaluate_trust({0.0, 1.0, 0.9, true});
  CHECK(value < 0.5);
}

TEST_CASE("link classification applies the threshold inclusively") {
  const std::vector<TrustRecord> records = {
      {1, 2, 0.72, true, 0.0},
      {2, 1, 0.5, true, 0.0},
      {1, 3, 0.49, false, 0.0},
  };
  const LinkClassification split = classify_links(records, 0.5);
  REQUIRE(split.trusted.size() == 2);
  REQUIRE(split.untrusted.size() == 1);
  CHECK(split.trusted[0].subject == 2);
  CHECK(split.trusted[0].evaluator == 1);
  CHECK(split.trusted[1].subject == 1);
  CHECK(split.untrusted[0].subject == 3);
  CHECK_THROWS_AS(classify_links(records, 1.5), std::invalid_argument);
}

TEST_CASE("a node is malicious exactly when nobody trusts it") {
  const std::vector<NodeId> nodes = {0, 1, 2, 3};
  const std::vector<DirectedLink> trusted = {
      {1, 0, 0.8},  // node 0 trusts node 1
      {0, 1, 0.9},
      {3, 2, 0.6},  // node 2 trusts node 3; nobody trusts node 2
  };
  CHECK_FALSE(find_malicious(1, trusted, nodes));
  CHECK_FALSE(find_malicious(0, trusted, nodes));
  CHECK_FALSE(find_malicious(3, trusted, nodes));
  CHECK(find_malicious(2, trusted, nodes));
  CHECK_THROWS_AS(find_malicious(9, trusted, nodes), std::invalid_argument);
}

namespace {

TrustManager make_manager() {
  TrustManager::Options opts;
  return TrustManager(opts, FuzzyTables::bundled(),
                      [](NodeId) { return std::make_pair(0.9, 1.0); });
}

}  // namespace

TEST_CASE("trust manager rolls time-due windows into fresh records") {
  TrustManager mgr = make_manager();
  mgr.register_link(1, 2, 0.0);
  mgr.register_link(1, 3, 0.0);
  mgr.register_link(2, 1, 0.0);
  CHECK(mgr.trust(1, 2) == doctest::Approx(0.55));

  // Subject 2 acks everything at the same latency as subject 3.
  for (int i = 0; i < 10; ++i) {
    mgr.note_transmission(1, 2);
    mgr.note_ack(1, 2, 0.1);
    mgr.note_transmission(1, 3);
    mgr.note_ack(1, 3, 0.1);
  }

  mgr.roll_windows(4.0);  // not due yet
  CHECK(mgr.trust(1, 2) == doctest::Approx(0.55));
  mgr.roll_windows(5.0);
  // A latency ratio of exactly 1 sits mid-crossover between the average and
  // high delay labels, so trust blends the low and high plateaus.
  CHECK(std::abs(mgr.trust(1, 2) - 0.7213963) < 1e-3);
  CHECK(std::abs(mgr.trust(1, 3) - 0.7213963) < 1e-3);

  // The dormant pair keeps its record untouched.
  CHECK(mgr.trust(2, 1) == doctest::Approx(0.55));
  const auto& stats = mgr.completed_windows().at({1, 2});
  CHECK(stats.packets_sent == 10);
  CHECK(stats.acks_received == 10);
  CHECK(stats.neighbourhood_latency_s == doctest::Approx(0.1));
}

TEST_CASE("trust manager rolls early once the packet budget fills") {
  TrustManager mgr = make_manager();
  mgr.register_link(1, 2, 0.0);
  mgr.register_link(1, 3, 0.0);
  for (int i = 0; i < 100; ++i) {
    mgr.note_transmission(1, 2);
    mgr.note_ack(1, 2, 0.2);
    mgr.note_transmission(1, 3);
    mgr.note_ack(1, 3, 0.2);
  }
  mgr.roll_windows(1.0);
  const auto& stats = mgr.completed_windows().at({1, 2});
  CHECK(stats.packets_sent == 100);
  CHECK(std::abs(mgr.trust(1, 2) - 0.7213963) < 1e-3);
}

TEST_CASE("a subject that drops everything collapses to very low trust") {
  TrustManager mgr = make_manager();
  mgr.register_link(1, 2, 0.0);
  mgr.register_link(1, 3, 0.0);
  for (int i = 0; i < 10; ++i) {
    mgr.note_transmission(1, 2);  // never acked
    mgr.note_transmission(1, 3);
    mgr.note_ack(1, 3, 0.1);
  }
  mgr.roll_windows(5.0);
  CHECK(std::abs(mgr.trust(1, 2) - 0.2127451) < 1e-3);
  CHECK(mgr.records().at({1, 2}).trusted == false);
  CHECK(mgr.records().at({1, 3}).trusted == true);
}

TEST_CASE("unmatched duplicate acks push the window into overflow") {
  TrustManager mgr = make_manager();
  mgr.register_link(1, 2, 0.0);
  for (int i = 0; i < 10; ++i) {
    mgr.note_transmission(1, 2);
    mgr.note_ack(1, 2, 0.1);
    mgr.note_unmatched_ack(1, 2);
    mgr.note_unmatched_ack(1, 2);
  }
  mgr.roll_windows(5.0);
  const auto& stats = mgr.completed_windows().at({1, 2});
  CHECK(stats.packets_sent == 10);
  CHECK(stats.acks_received == 30);
  CHECK(mgr.trust(1, 2) < 0.5);
  CHECK(mgr.records().at({1, 2}).trusted == false);
}

TEST_CASE("frozen endpoints stop rolling and drop out of the active view") {
  TrustManager mgr = make_manager();
  mgr.register_link(1, 2, 0.0);
  mgr.register_link(3, 1, 0.0);
  for (int i = 0; i < 10; ++i) {
    mgr.note_transmission(1, 2);
    mgr.note_transmission(3, 1);
    mgr.note_ack(3, 1, 0.1);
  }
  mgr.freeze_node(2);
  mgr.roll_windows(5.0);
  CHECK(mgr.trust(1, 2) == doctest::Approx(0.55));  // frozen, never re-evaluated

  const auto active = mgr.active_records();
  REQUIRE(active.size() == 1);
  CHECK(active[0].evaluator == 3);
  CHECK(active[0].subject == 1);

  const LinkClassification split = mgr.classify(0.5, 5.0);
  CHECK(split.trusted.size() + split.untrusted.size() == 1);
}

TEST_CASE("presumption records expire after one evidence-free window") {
  TrustManager mgr = make_manager();
  mgr.register_link(1, 2, 0.0);  // never carries traffic: stays presumption
  mgr.register_link(1, 3, 0.0);
  mgr.register_link(4, 3, 0.0);
  for (int i = 0; i < 10; ++i) {
    mgr.note_transmission(1, 3);
    mgr.note_ack(1, 3, 0.1);
    mgr.note_transmission(4, 3);
    mgr.note_ack(4, 3, 0.1);
  }

  // Before the window elapses the presumption still counts as trusted.
  LinkClassification early = mgr.classify(0.5, 4.0);
  CHECK(early.trusted.size() == 3);

  mgr.roll_windows(5.0);
  for (const TrustRecord& r : mgr.active_records()) {
    if (r.evaluator == 1 && r.subject == 2) {
      CHECK_FALSE(r.evaluated);
      CHECK(mgr.presumption_stale(r, 5.0));
    } else {
      CHECK(r.evaluated);
      CHECK_FALSE(mgr.presumption_stale(r, 5.0));
    }
  }

  const LinkClassification late = mgr.classify(0.5, 5.0);
  CHECK(late.trusted.size() == 2);
  REQUIRE(late.untrusted.size() == 1);
  CHECK(late.untrusted[0].evaluator == 1);
  CHECK(late.untrusted[0].subject == 2);
}
