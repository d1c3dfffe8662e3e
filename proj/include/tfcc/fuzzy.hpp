#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tfcc {

// Trapezoidal membership function with knots a <= b <= c <= d.
// Degenerate edges (a == b or c == d) act as shoulders: membership is 1 at the
// shared knot and 0 immediately outside [a, d].
struct Trapezoid {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double eval(double x) const;
};

// One crisp label range used when deriving a partition: membership for
// `label` is intended to be 1 well inside [lo, hi] and to hand over to the
// neighbouring label inside the overlap (or synthetic crossover) region.
struct LabelRange {
  std::string label;
  double lo = 0.0;
  double hi = 0.0;
};

// An ordered family of labelled trapezoids over one crisp axis.
//
// Partitions built by `from_ranges` form a Ruspini partition: at every
// in-domain point the label memberships sum to exactly 1. Adjacent ranges
// must either overlap (the overlap becomes the linear crossover) or abut
// (a synthetic crossover of width 10% of the lower range's span is centred
// on the shared endpoint).
class FuzzyPartition {
 public:
  FuzzyPartition(std::string axis, std::vector<std::string> labels,
                 std::vector<Trapezoid> shapes, double domain_min, double domain_max,
                 bool unbounded_top = false);

  // Derives trapezoids from ordered crisp ranges. The first label gets a left
  // shoulder, the last a right shoulder. With `unbounded_top` the last label
  // plateaus up to `top_cap`, and inputs beyond the cap clamp to it.
  static FuzzyPartition from_ranges(std::string axis, std::span<const LabelRange> ranges,
                                    bool unbounded_top = false, double top_cap = 3.0);

  const std::string& axis() const { return axis_; }
  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const Trapezoid& shape(std::size_t i) const { return shapes_[i]; }
  double domain_min() const { return domain_min_; }
  double domain_max() const { return domain_max_; }
  bool unbounded_top() const { return unbounded_top_; }

  // Index of `label`; throws std::invalid_argument for unknown labels.
  std::size_t index_of(const std::string& label) const;

  // Clamps x into the domain and evaluates every label. NaN is rejected with
  // std::domain_error since it signals corrupt telemetry upstream.
  std::vector<double> memberships(double x) const;

 private:
  std::string axis_;
  std::vector<std::string> labels_;
  std::vector<Trapezoid> shapes_;
  double domain_min_;
  double domain_max_;
  bool unbounded_top_;
};

// Degrees of membership over one partition's labels, parallel to its label
// order. For fuzzified in-domain inputs on a Ruspini partition the degrees
// sum to 1 within numeric noise.
struct MembershipVector {
  const FuzzyPartition* partition = nullptr;
  std::vector<double> degrees;
};

MembershipVector fuzzify(const FuzzyPartition& partition, double x);

// Mamdani rule table: every combination of input labels maps to exactly one
// output label. Rows are added in aggregated form (alternative labels per
// input axis) and expanded to individual rules; `finalize` verifies full
// coverage with no conflicting duplicates.
class RuleTable {
 public:
  RuleTable(std::string name, std::vector<const FuzzyPartition*> input_axes,
            const FuzzyPartition* output_axis);

  // Expands the cartesian product of the per-axis alternatives into rules.
  // Re-adding an existing combination with a different consequent throws.
  void add_row(const std::vector<std::vector<std::string>>& antecedent_alternatives,
               const std::string& consequent);

  // Verifies every input combination has a rule.
  void finalize();

  const std::string& name() const { return name_; }
  std::size_t input_count() const { return axes_.size(); }
  const FuzzyPartition& input_axis(std::size_t i) const { return *axes_[i]; }
  const FuzzyPartition& output_axis() const { return *output_; }
  std::size_t rule_count() const { return rules_set_; }
  std::size_t combination_count() const { return rule_out_.size(); }

  // Output label index for one concrete combination of input label indices.
  int consequent_of(std::span<const std::size_t> label_indices) const;

  // Min-implication rule firing with max aggregation of output degrees.
  // Inputs must be membership vectors over this table's input axes.
  MembershipVector infer(std::span<const MembershipVector> inputs) const;

 private:
  std::size_t flat_index(std::span<const std::size_t> label_indices) const;

  std::string name_;
  std::vector<const FuzzyPartition*> axes_;
  const FuzzyPartition* output_;
  std::vector<int> rule_out_;  // flat combination index -> output label index, -1 unset
  std::size_t rules_set_ = 0;
};

// Centroid of the max-aggregated, degree-clipped output shapes, integrated
// with the trapezoidal rule on a fixed 2001-point grid over the output
// domain. Throws std::domain_error when every degree is zero: full rule
// coverage makes that unreachable, so hitting it means a broken rule table.
double defuzzify_centroid(const FuzzyPartition& output, const MembershipVector& degrees);

}  // namespace tfcc
