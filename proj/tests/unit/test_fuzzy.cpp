#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "tfcc/fuzzy.hpp"

using namespace tfcc;

namespace {

// Independent trapezoid evaluation, kept separate from the library on
// purpose so shape bugs cannot cancel out in the oracle comparisons.
double trap_ref(const Trapezoid& t, double x) {
  if (x < t.a || x > t.d) return 0.0;
  double rising = (t.b > t.a) ? (x - t.a) / (t.b - t.a) : 1.0;
  double falling = (t.d > t.c) ? (t.d - x) / (t.d - t.c) : 1.0;
  return std::min({1.0, rising, falling});
}

// Midpoint Riemann centroid over 100k intervals; the library integrates on a
// 2001-point grid, so agreement within 1e-3 is the contract.
double centroid_ref(const FuzzyPartition& p, const std::vector<double>& degrees) {
  const int n = 100000;
  const double lo = p.domain_min();
  const double h = (p.domain_max() - lo) / n;
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (i + 0.5) * h;
    double mu = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
      mu = std::max(mu, std::min(degrees[k], trap_ref(p.shape(k), x)));
    num += x * mu;
    den += mu;
  }
  return num / den;
}

FuzzyPartition two_label_partition() {
  const std::vector<LabelRange> ranges = {{"low", 0.0, 0.6}, {"high", 0.4, 1.0}};
  return FuzzyPartition::from_ranges("toy", ranges);
}

}  // namespace

TEST_CASE("trapezoid evaluation covers edges and shoulders") {
  const Trapezoid t{0.2, 0.4, 0.6, 0.8};
  CHECK(t.eval(0.1) == 0.0);
  CHECK(t.eval(0.2) == 0.0);
  CHECK(t.eval(0.3) == doctest::Approx(0.5));
  CHECK(t.eval(0.4) == 1.0);
  CHECK(t.eval(0.5) == 1.0);
  CHECK(t.eval(0.6) == 1.0);
  CHECK(t.eval(0.7) == doctest::Approx(0.5));
  CHECK(t.eval(0.8) == 0.0);
  CHECK(t.eval(0.9) == 0.0);

  const Trapezoid left{0.0, 0.0, 0.4, 0.5};
  CHECK(left.eval(0.0) == 1.0);
  CHECK(left.eval(0.4) == 1.0);
  CHECK(left.eval(0.45) == doctest::Approx(0.5));
  CHECK(left.eval(0.5) == 0.0);

  const Trapezoid right{0.5, 0.6, 1.0, 1.0};
  CHECK(right.eval(1.0) == 1.0);
  CHECK(right.eval(0.55) == doctest::Approx(0.5));
  CHECK(right.eval(0.5) == 0.0);
}

TEST_CASE("from_ranges turns overlaps into linear crossovers") {
  const auto p = two_label_partition();
  REQUIRE(p.size() == 2);
  CHECK(p.label(0) == "low");
  CHECK(p.label(1) == "high");

  const Trapezoid& low = p.shape(0);
  CHECK(low.a == 0.0);
  CHECK(low.b == 0.0);
  CHECK(low.c == doctest::Approx(0.4));
  CHECK(low.d == doctest::Approx(0.6));
  const Trapezoid& high = p.shape(1);
  CHECK(high.a == doctest::Approx(0.4));
  CHECK(high.b == doctest::Approx(0.6));
  CHECK(high.c == 1.0);
  CHECK(high.d == 1.0);
}

TEST_CASE("from_ranges synthesizes a crossover for abutting ranges") {
  const std::vector<LabelRange> ranges = {{"A", 0.0, 1.0}, {"B", 1.0, 2.0}};
  const auto p = FuzzyPartition::from_ranges("abut", ranges);

  // Width is 10% of the lower range's span, centred on the shared endpoint.
  CHECK(p.shape(0).c == doctest::Approx(0.95));
  CHECK(p.shape(0).d == doctest::Approx(1.05));
  CHECK(p.shape(1).a == doctest::Approx(0.95));
  CHECK(p.shape(1).b == doctest::Approx(1.05));
  CHECK(p.shape(1).c == 2.0);
  CHECK(p.shape(1).d == 2.0);
}

TEST_CASE("from_ranges open-ended top label plateaus to the cap and clamps") {
  const std::vector<LabelRange> ranges = {{"A", 0.0, 1.0}, {"B", 1.0, 3.0}};
  const auto p = FuzzyPartition::from_ranges("open", ranges, /*unbounded_top=*/true, 3.0);
  CHECK(p.domain_max() == 3.0);
  CHECK(p.shape(1).c == 3.0);
  CHECK(p.shape(1).d == 3.0);

  const auto far_out = p.memberships(500.0);
  CHECK(far_out[0] == 0.0);
  CHECK(far_out[1] == 1.0);
}

TEST_CASE("from_ranges rejects malformed range lists") {
  using R = std::vector<LabelRange>;
  CHECK_THROWS_AS(FuzzyPartition::from_ranges("x", R{}), std::invalid_argument);
  CHECK_THROWS_AS(FuzzyPartition::from_ranges("x", R{{"A", 0.5, 0.5}}), std::invalid_argument);
  // Non-monotone bounds.
  CHECK_THROWS_AS(FuzzyPartition::from_ranges("x", R{{"A", 0.0, 1.0}, {"B", 0.5, 0.9}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(FuzzyPartition::from_ranges("x", R{{"A", 0.0, 1.0}, {"B", 0.0, 1.5}}),
                  std::invalid_argument);
  // Gap between ranges.
  CHECK_THROWS_AS(FuzzyPartition::from_ranges("x", R{{"A", 0.0, 0.4}, {"B", 0.5, 1.0}}),
                  std::invalid_argument);
  // A point may belong to at most two labels.
  CHECK_THROWS_AS(
      FuzzyPartition::from_ranges("x", R{{"A", 0.0, 1.0}, {"B", 0.1, 1.1}, {"C", 0.2, 2.0}}),
      std::invalid_argument);
  // Synthetic crossover must stay inside the neighbour ranges.
  CHECK_THROWS_AS(FuzzyPartition::from_ranges("x", R{{"A", 0.0, 1.0}, {"B", 1.0, 1.04}}),
                  std::invalid_argument);
  // Duplicate labels.
  CHECK_THROWS_AS(FuzzyPartition::from_ranges("x", R{{"A", 0.0, 0.6}, {"A", 0.4, 1.0}}),
                  std::invalid_argument);
}

TEST_CASE("memberships clamp into the domain and reject NaN") {
  const auto p = two_label_partition();
  const auto below = p.memberships(-3.0);
  CHECK(below[0] == 1.0);
  CHECK(below[1] == 0.0);
  const auto above = p.memberships(7.0);
  CHECK(above[0] == 0.0);
  CHECK(above[1] == 1.0);
  CHECK_THROWS_AS(p.memberships(std::nan("")), std::domain_error);
  CHECK_THROWS_AS(p.index_of("nope"), std::invalid_argument);
}

TEST_CASE("fuzzified degrees on a derived partition sum to one") {
  const auto p = two_label_partition();
  for (int i = 0; i <= 1000; ++i) {
    const double x = i / 1000.0;
    const auto m = p.memberships(x);
    double sum = 0.0;
    for (double d : m) sum += d;
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
  const auto mid = fuzzify(p, 0.5);
  CHECK(mid.partition == &p);
  CHECK(mid.degrees[0] == doctest::Approx(0.5));
  CHECK(mid.degrees[1] == doctest::Approx(0.5));
}

TEST_CASE("rule table expands alternatives and rejects conflicts") {
  const auto x = two_label_partition();
  const auto y = two_label_partition();
  const std::vector<LabelRange> out_ranges = {{"small", 0.0, 0.6}, {"big", 0.4, 1.0}};
  const auto z = FuzzyPartition::from_ranges("out", out_ranges);

  RuleTable table("toy", {&x, &y}, &z);
  table.add_row({{"low"}, {"low", "high"}}, "small");
  CHECK(table.rule_count() == 2);
  CHECK(table.combination_count() == 4);
  CHECK_THROWS_AS(table.finalize(), std::logic_error);

  // Same combination, same consequent: idempotent. Different consequent: conflict.
  table.add_row({{"low"}, {"low"}}, "small");
  CHECK(table.rule_count() == 2);
  CHECK_THROWS_AS(table.add_row({{"low"}, {"low"}}, "big"), std::invalid_argument);

  table.add_row({{"high"}, {"low", "high"}}, "big");
  CHECK_NOTHROW(table.finalize());
  CHECK(table.rule_count() == 4);

  const std::size_t ll[] = {0, 0};
  const std::size_t hh[] = {1, 1};
  CHECK(table.consequent_of(ll) == 0);
  CHECK(table.consequent_of(hh) == 1);

  CHECK_THROWS_AS(table.add_row({{"low"}}, "small"), std::invalid_argument);
  CHECK_THROWS_AS(table.add_row({{"low"}, {"nope"}}, "small"), std::invalid_argument);
  CHECK_THROWS_AS(table.add_row({{"low"}, {"high"}}, "nope"), std::invalid_argument);
}

TEST_CASE("inference clips with min and aggregates with max") {
  const auto x = two_label_partition();
  const std::vector<LabelRange> out_ranges = {{"small", 0.0, 0.6}, {"big", 0.4, 1.0}};
  const auto z = FuzzyPartition::from_ranges("out", out_ranges);

  RuleTable table("toy", {&x}, &z);
  table.add_row({{"low"}}, "small");
  table.add_row({{"high"}}, "big");
  table.finalize();

  const MembershipVector in[] = {fuzzify(x, 0.45)};  // low 0.75, high 0.25
  const MembershipVector fired = table.infer(in);
  CHECK(fired.partition == &z);
  CHECK(fired.degrees[0] == doctest::Approx(0.75));
  CHECK(fired.degrees[1] == doctest::Approx(0.25));

  // Inputs over a foreign partition are rejected by identity, not by shape.
  const auto x_clone = two_label_partition();
  const MembershipVector foreign[] = {fuzzify(x_clone, 0.45)};
  CHECK_THROWS_AS(table.infer(foreign), std::invalid_argument);
}

TEST_CASE("centroid defuzzification matches hand-computed trapezoid centroids") {
  const std::vector<LabelRange> ranges = {
      {"VL", 0.0, 0.45}, {"L", 0.4, 0.6}, {"M", 0.55, 0.75}, {"H", 0.7, 1.0}};
  const auto p = FuzzyPartition::from_ranges("unit", ranges);

  // Integrals done by hand from the trapezoid geometry.
  const struct {
    std::size_t label;
    double expected;
  } cases[] = {
      {0, 0.2127451},  // (0,0,.4,.45)
      {1, 0.5},        // symmetric
      {2, 0.65},       // symmetric
      {3, 0.8621212},  // (.7,.75,1,1)
  };
  for (const auto& c : cases) {
    MembershipVector mv{&p, std::vector<double>(p.size(), 0.0)};
    mv.degrees[c.label] = 1.0;
    CHECK(std::abs(defuzzify_centroid(p, mv) - c.expected) < 1e-3);
  }

  MembershipVector none{&p, std::vector<double>(p.size(), 0.0)};
  CHECK_THROWS_AS(defuzzify_centroid(p, none), std::domain_error);
}

TEST_CASE("centroid defuzzification agrees with a fine Riemann sum") {
  const std::vector<LabelRange> ranges = {
      {"VL", 0.0, 0.45}, {"L", 0.4, 0.6}, {"M", 0.55, 0.75}, {"H", 0.7, 1.0}};
  const auto p = FuzzyPartition::from_ranges("unit", ranges);

  std::mt19937 rng(20240811);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    MembershipVector mv{&p, std::vector<double>(p.size(), 0.0)};
    double mass = 0.0;
    for (double& d : mv.degrees) {
      d = (unit(rng) < 0.3) ? 0.0 : unit(rng);
      mass += d;
    }
    if (mass == 0.0) mv.degrees[trial % p.size()] = 0.5;
    const double got = defuzzify_centroid(p, mv);
    const double want = centroid_ref(p, mv.degrees);
    CHECK(std::abs(got - want) < 1e-3);
  }
}
