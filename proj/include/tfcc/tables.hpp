#pragma once

#include <memory>
#include <vector>

#include <json.hpp>

#include "tfcc/fuzzy.hpp"

namespace tfcc {

// The protocol's membership families and rule tables.
//
// Axes (all label memberships sum to 1 across each axis):
//   transmission: VL L M H    over [0, 1]   ack-to-send ratio of a neighbour
//   latency:      VLD LD AD HD over [0, 3]  latency relative to the neighbourhood,
//                                           HD plateaus to the cap (inputs clamp there)
//   energy:       VLE LE ME HE over [0, 1]  battery remaining / full battery
//   trust:        VLT LT MT HT over [0, 1]  crisp trust output
//   congestion:   VLC LC MC HC over [0, 1]  node congestion index
//   damping:      VL L M H    over [0, 1]   rate-damping output
//
// trust_rules maps (transmission, latency, energy) -> trust.
// damping_rules maps (congestion, benevolent trust) -> damping; its trust
// axis is restricted to the MT/HT labels because lower trust mass is dropped
// and renormalized before the table applies.
//
// The instance is heap-pinned: rule tables hold pointers into the owning
// struct, so it must never be copied or moved.
class FuzzyTables {
 public:
  FuzzyPartition transmission;
  FuzzyPartition latency;
  FuzzyPartition energy;
  FuzzyPartition trust;
  FuzzyPartition benevolent_trust;
  FuzzyPartition congestion;
  FuzzyPartition damping;
  RuleTable trust_rules;
  RuleTable damping_rules;

  FuzzyTables(const FuzzyTables&) = delete;
  FuzzyTables& operator=(const FuzzyTables&) = delete;

  static std::shared_ptr<const FuzzyTables> bundled();

  // Accepts the same label-range and rule-row structures from a config
  // document; omitted entries fall back to the bundled definitions.
  // Schema:
  //   { "partitions": { "<axis>": [["VL", 0, 0.45], ...], ... },
  //     "trust_rules": [{"if": [["VL","L"], ["AD"], ["ME"]], "then": "MT"}, ...],
  //     "damping_rules": [...] }
  static std::shared_ptr<const FuzzyTables> from_json(const nlohmann::json& spec);

  // Partitions that must satisfy the sum-to-1 property over their domains.
  std::vector<const FuzzyPartition*> ruspini_partitions() const;

 private:
  struct Definition;
  explicit FuzzyTables(const Definition& def);
};

// Process-wide default tables.
const FuzzyTables& default_tables();

}  // namespace tfcc
