#include "tfcc/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tfcc {

double Trapezoid::eval(double x) const {
  if (x < a || x > d) return 0.0;
  if (x < b) return (x - a) / (b - a);
  if (x <= c) return 1.0;
  return (d - x) / (d - c);
}

FuzzyPartition::FuzzyPartition(std::string axis, std::vector<std::string> labels,
                               std::vector<Trapezoid> shapes, double domain_min,
                               double domain_max, bool unbounded_top)
    : axis_(std::move(axis)),
      labels_(std::move(labels)),
      shapes_(std::move(shapes)),
      domain_min_(domain_min),
      domain_max_(domain_max),
      unbounded_top_(unbounded_top) {
  if (labels_.empty() || labels_.size() != shapes_.size())
    throw std::invalid_argument("partition '" + axis_ + "': labels and shapes must match and be non-empty");
  if (!(domain_min_ < domain_max_))
    throw std::invalid_argument("partition '" + axis_ + "': empty domain");
  for (const Trapezoid& t : shapes_) {
    if (!(t.a <= t.b && t.b <= t.c && t.c <= t.d))
      throw std::invalid_argument("partition '" + axis_ + "': trapezoid knots out of order");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i)
    for (std::size_t j = i + 1; j < labels_.size(); ++j)
      if (labels_[i] == labels_[j])
        throw std::invalid_argument("partition '" + axis_ + "': duplicate label " + labels_[i]);
}

FuzzyPartition FuzzyPartition::from_ranges(std::string axis, std::span<const LabelRange> ranges,
                                           bool unbounded_top, double top_cap) {
  if (ranges.empty()) throw std::invalid_argument("partition '" + axis + "': no label ranges");
  for (const LabelRange& r : ranges) {
    if (r.label.empty()) throw std::invalid_argument("partition '" + axis + "': empty label name");
    if (!(r.lo < r.hi))
      throw std::invalid_argument("partition '" + axis + "': range for " + r.label + " is empty");
  }
  const std::size_t n = ranges.size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (!(ranges[k + 1].lo > ranges[k].lo) || !(ranges[k + 1].hi > ranges[k].hi))
      throw std::invalid_argument("partition '" + axis + "': non-monotone ranges at " +
                                  ranges[k + 1].label);
    if (ranges[k + 1].lo > ranges[k].hi)
      throw std::invalid_argument("partition '" + axis + "': gap between " + ranges[k].label +
                                  " and " + ranges[k + 1].label);
  }

  const double top = unbounded_top ? top_cap : ranges[n - 1].hi;
  if (unbounded_top && !(top_cap > ranges[n - 1].lo))
    throw std::invalid_argument("partition '" + axis + "': top cap below last range");

  // Crossover interval between label k and k+1. Overlapping ranges hand over
  // across the overlap itself; abutting ranges get a synthetic crossover of
  // width 10% of the lower range's span centred on the shared endpoint.
  struct Interval {
    double lo, hi;
  };
  std::vector<Interval> cross(n >= 1 ? n - 1 : 0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double overlap_lo = ranges[k + 1].lo;
    const double overlap_hi = ranges[k].hi;
    if (overlap_lo < overlap_hi) {
      cross[k] = {overlap_lo, overlap_hi};
    } else {
      const double w = 0.1 * (ranges[k].hi - ranges[k].lo);
      cross[k] = {overlap_hi - w / 2.0, overlap_hi + w / 2.0};
    }
  }
  for (std::size_t k = 0; k + 1 < cross.size(); ++k) {
    if (cross[k].hi > cross[k + 1].lo)
      throw std::invalid_argument("partition '" + axis + "': more than pairwise overlap around " +
                                  ranges[k + 1].label);
  }
  if (!cross.empty()) {
    if (cross.front().lo < ranges[0].lo || cross.back().hi > top)
      throw std::invalid_argument("partition '" + axis + "': crossover escapes the domain");
  }

  std::vector<std::string> labels;
  std::vector<Trapezoid> shapes;
  labels.reserve(n);
  shapes.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Trapezoid t;
    t.a = (k == 0) ? ranges[0].lo : cross[k - 1].lo;
    t.b = (k == 0) ? ranges[0].lo : cross[k - 1].hi;
    t.c = (k + 1 == n) ? top : cross[k].lo;
    t.d = (k + 1 == n) ? top : cross[k].hi;
    labels.push_back(ranges[k].label);
    shapes.push_back(t);
  }
  return FuzzyPartition(std::move(axis), std::move(labels), std::move(shapes), ranges[0].lo, top,
                        unbounded_top);
}

std::size_t FuzzyPartition::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return i;
  throw std::invalid_argument("partition '" + axis_ + "': unknown label " + label);
}

std::vector<double> FuzzyPartition::memberships(double x) const {
  if (std::isnan(x)) throw std::domain_error("partition '" + axis_ + "': NaN input");
  const double clamped = std::clamp(x, domain_min_, domain_max_);
  std::vector<double> out(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) out[i] = shapes_[i].eval(clamped);
  return out;
}

MembershipVector fuzzify(const FuzzyPartition& partition, double x) {
  return MembershipVector{&partition, partition.memberships(x)};
}

RuleTable::RuleTable(std::string name, std::vector<const FuzzyPartition*> input_axes,
                     const FuzzyPartition* output_axis)
    : name_(std::move(name)), axes_(std::move(input_axes)), output_(output_axis) {
  if (axes_.empty() || axes_.size() > 3)
    throw std::invalid_argument("rule table '" + name_ + "': needs 1 to 3 input axes");
  if (output_ == nullptr) throw std::invalid_argument("rule table '" + name_ + "': no output axis");
  std::size_t combos = 1;
  for (const FuzzyPartition* axis : axes_) {
    if (axis == nullptr) throw std::invalid_argument("rule table '" + name_ + "': null input axis");
    combos *= axis->size();
  }
  rule_out_.assign(combos, -1);
}

std::size_t RuleTable::flat_index(std::span<const std::size_t> label_indices) const {
  std::size_t flat = 0;
  for (std::size_t ax = 0; ax < axes_.size(); ++ax) flat = flat * axes_[ax]->size() + label_indices[ax];
  return flat;
}

void RuleTable::add_row(const std::vector<std::vector<std::string>>& antecedent_alternatives,
                        const std::string& consequent) {
  if (antecedent_alternatives.size() != axes_.size())
    throw std::invalid_argument("rule table '" + name_ + "': row arity mismatch");
  const int out_idx = static_cast<int>(output_->index_of(consequent));

  std::vector<std::vector<std::size_t>> alts(axes_.size());
  for (std::size_t ax = 0; ax < axes_.size(); ++ax) {
    if (antecedent_alternatives[ax].empty())
      throw std::invalid_argument("rule table '" + name_ + "': empty alternative set");
    for (const std::string& label : antecedent_alternatives[ax])
      alts[ax].push_back(axes_[ax]->index_of(label));
  }

  std::vector<std::size_t> pick(axes_.size(), 0);
  while (true) {
    std::vector<std::size_t> indices(axes_.size());
    for (std::size_t ax = 0; ax < axes_.size(); ++ax) indices[ax] = alts[ax][pick[ax]];
    const std::size_t flat = flat_index(indices);
    if (rule_out_[flat] != -1 && rule_out_[flat] != out_idx)
      throw std::invalid_argument("rule table '" + name_ + "': conflicting rule");
    if (rule_out_[flat] == -1) {
      rule_out_[flat] = out_idx;
      ++rules_set_;
    }
    std::size_t ax = axes_.size();
    while (ax > 0) {
      --ax;
      if (++pick[ax] < alts[ax].size()) break;
      pick[ax] = 0;
      if (ax == 0) return;
    }
  }
}

void RuleTable::finalize() {
  for (std::size_t flat = 0; flat < rule_out_.size(); ++flat)
    if (rule_out_[flat] == -1)
      throw std::logic_error("rule table '" + name_ + "': incomplete coverage");
}

int RuleTable::consequent_of(std::span<const std::size_t> label_indices) const {
  if (label_indices.size() != axes_.size())
    throw std::invalid_argument("rule table '" + name_ + "': arity mismatch");
  for (std::size_t ax = 0; ax < axes_.size(); ++ax)
    if (label_indices[ax] >= axes_[ax]->size())
      throw std::invalid_argument("rule table '" + name_ + "': label index out of range");
  return rule_out_[flat_index(label_indices)];
}

MembershipVector RuleTable::infer(std::span<const MembershipVector> inputs) const {
  if (inputs.size() != axes_.size())
    throw std::invalid_argument("rule table '" + name_ + "': input count mismatch");
  for (std::size_t ax = 0; ax < axes_.size(); ++ax) {
    if (inputs[ax].partition != axes_[ax])
      throw std::invalid_argument("rule table '" + name_ + "': input " + std::to_string(ax) +
                                  " is over the wrong partition");
    if (inputs[ax].degrees.size() != axes_[ax]->size())
      throw std::invalid_argument("rule table '" + name_ + "': degree vector size mismatch");
  }

  MembershipVector out{output_, std::vector<double>(output_->size(), 0.0)};
  std::vector<std::size_t> indices(axes_.size());
  for (std::size_t flat = 0; flat < rule_out_.size(); ++flat) {
    std::size_t rem = flat;
    for (std::size_t ax = axes_.size(); ax-- > 0;) {
      indices[ax] = rem % axes_[ax]->size();
      rem /= axes_[ax]->size();
    }
    double strength = 1.0;
    for (std::size_t ax = 0; ax < axes_.size(); ++ax)
      strength = std::min(strength, inputs[ax].degrees[indices[ax]]);
    if (strength <= 0.0) continue;
    const int out_idx = rule_out_[flat];
    if (out_idx < 0) throw std::logic_error("rule table '" + name_ + "': unfinalized rule hit");
    out.degrees[out_idx] = std::max(out.degrees[out_idx], strength);
  }
  return out;
}

double defuzzify_centroid(const FuzzyPartition& output, const MembershipVector& degrees) {
  if (degrees.partition != &output)
    throw std::invalid_argument("defuzzify: degrees are over the wrong partition");
  if (degrees.degrees.size() != output.size())
    throw std::invalid_argument("defuzzify: degree vector size mismatch");
  bool any = false;
  for (double d : degrees.degrees)
    if (d > 0.0) any = true;
  if (!any)
    throw std::domain_error("defuzzify: all degrees zero (broken rule table upstream)");

  constexpr int kGridPoints = 2001;
  const double lo = output.domain_min();
  const double hi = output.domain_max();
  const double h = (hi - lo) / (kGridPoints - 1);
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < kGridPoints; ++i) {
    const double x = lo + h * i;
    double mu = 0.0;
    for (std::size_t k = 0; k < output.size(); ++k)
      mu = std::max(mu, std::min(degrees.degrees[k], output.shape(k).eval(x)));
    const double w = (i == 0 || i == kGridPoints - 1) ? 0.5 : 1.0;
    num += w * x * mu;
    den += w * mu;
  }
  if (den <= 0.0) throw std::domain_error("defuzzify: aggregated area is zero");
  return std::clamp(num / den, lo, hi);
}

}  // namespace tfcc
