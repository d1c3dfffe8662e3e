#include "tfcc/tables.hpp"

#include <stdexcept>

namespace tfcc {

namespace {

struct RuleRow {
  std::vector<std::vector<std::string>> antecedents;
  std::string consequent;
};

std::vector<LabelRange> default_transmission_ranges() {
  return {{"VL", 0.0, 0.45}, {"L", 0.4, 0.6}, {"M", 0.55, 0.75}, {"H", 0.7, 1.0}};
}

std::vector<LabelRange> default_latency_ranges() {
  // HD is open-ended: anything clearly slower than the neighbourhood. The
  // partition plateaus at the cap and inputs clamp there.
  return {{"VLD", 0.0, 0.45}, {"LD", 0.4, 0.6}, {"AD", 0.55, 1.0}, {"HD", 1.0, 3.0}};
}

std::vector<LabelRange> default_energy_ranges() {
  return {{"VLE", 0.0, 0.45}, {"LE", 0.4, 0.6}, {"ME", 0.55, 0.75}, {"HE", 0.7, 1.0}};
}

std::vector<LabelRange> default_trust_ranges() {
  return {{"VLT", 0.0, 0.45}, {"LT", 0.4, 0.6}, {"MT", 0.55, 0.75}, {"HT", 0.7, 1.0}};
}

std::vector<LabelRange> default_congestion_ranges() {
  return {{"VLC", 0.0, 0.3}, {"LC", 0.25, 0.55}, {"MC", 0.5, 0.75}, {"HC", 0.7, 1.0}};
}

std::vector<LabelRange> default_damping_ranges() {
  return {{"VL", 0.0, 0.2}, {"L", 0.15, 0.5}, {"M", 0.45, 0.8}, {"H", 0.75, 1.0}};
}

// Low energy dominates; otherwise decent latency rewards good senders and
// poor latency caps trust at LT even for perfect senders.
std::vector<RuleRow> default_trust_rows() {
  return {
      {{{"VL", "L", "M", "H"}, {"VLD", "LD", "AD", "HD"}, {"VLE", "LE"}}, "VLT"},
      {{{"VL", "L"}, {"VLD", "HD"}, {"ME"}}, "VLT"},
      {{{"VL", "L"}, {"VLD", "HD"}, {"HE"}}, "VLT"},
      {{{"VL", "L"}, {"AD", "LD"}, {"ME"}}, "MT"},
      {{{"VL", "L"}, {"AD", "LD"}, {"HE"}}, "MT"},
      {{{"M", "H"}, {"AD", "LD"}, {"ME"}}, "HT"},
      {{{"M", "H"}, {"AD", "LD"}, {"HE"}}, "HT"},
      {{{"M", "H"}, {"VLD", "HD"}, {"ME"}}, "LT"},
      {{{"M", "H"}, {"VLD", "HD"}, {"HE"}}, "LT"},
  };
}

std::vector<RuleRow> default_damping_rows() {
  return {
      {{{"VLC"}, {"MT", "HT"}}, "VL"},
      {{{"LC"}, {"MT", "HT"}}, "L"},
      {{{"MC"}, {"MT"}}, "M"},
      {{{"MC"}, {"HT"}}, "M"},
      {{{"HC"}, {"MT"}}, "H"},
      {{{"HC"}, {"HT"}}, "H"},
  };
}

std::vector<LabelRange> ranges_from_json(const nlohmann::json& arr, const std::string& axis) {
  if (!arr.is_array() || arr.empty())
    throw std::invalid_argument("fuzzy tables: partition '" + axis + "' must be a non-empty array");
  std::vector<LabelRange> out;
  for (const auto& entry : arr) {
    if (!entry.is_array() || entry.size() != 3 || !entry[0].is_string() ||
        !entry[1].is_number() || !entry[2].is_number())
      throw std::invalid_argument("fuzzy tables: partition '" + axis +
                                  "' entries must be [label, lo, hi]");
    out.push_back({entry[0].get<std::string>(), entry[1].get<double>(), entry[2].get<double>()});
  }
  return out;
}

std::vector<RuleRow> rows_from_json(const nlohmann::json& arr, const std::string& table) {
  if (!arr.is_array() || arr.empty())
    throw std::invalid_argument("fuzzy tables: '" + table + "' must be a non-empty array");
  std::vector<RuleRow> out;
  for (const auto& entry : arr) {
    if (!entry.is_object() || !entry.contains("if") || !entry.contains("then"))
      throw std::invalid_argument("fuzzy tables: '" + table + "' rows need \"if\" and \"then\"");
    RuleRow row;
    for (const auto& alt : entry.at("if")) {
      std::vector<std::string> labels;
      for (const auto& l : alt) labels.push_back(l.get<std::string>());
      row.antecedents.push_back(std::move(labels));
    }
    row.consequent = entry.at("then").get<std::string>();
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

struct FuzzyTables::Definition {
  std::vector<LabelRange> transmission = default_transmission_ranges();
  std::vector<LabelRange> latency = default_latency_ranges();
  std::vector<LabelRange> energy = default_energy_ranges();
  std::vector<LabelRange> trust = default_trust_ranges();
  std::vector<LabelRange> congestion = default_congestion_ranges();
  std::vector<LabelRange> damping = default_damping_ranges();
  std::vector<RuleRow> trust_rows = default_trust_rows();
  std::vector<RuleRow> damping_rows = default_damping_rows();
};

FuzzyTables::FuzzyTables(const Definition& def)
    : transmission(FuzzyPartition::from_ranges("transmission", def.transmission)),
      latency(FuzzyPartition::from_ranges("latency", def.latency, /*unbounded_top=*/true)),
      energy(FuzzyPartition::from_ranges("energy", def.energy)),
      trust(FuzzyPartition::from_ranges("trust", def.trust)),
      benevolent_trust("benevolent_trust",
                       {trust.label(trust.size() - 2), trust.label(trust.size() - 1)},
                       {trust.shape(trust.size() - 2), trust.shape(trust.size() - 1)},
                       trust.domain_min(), trust.domain_max()),
      congestion(FuzzyPartition::from_ranges("congestion", def.congestion)),
      damping(FuzzyPartition::from_ranges("damping", def.damping)),
      trust_rules("trust_rules", {&transmission, &latency, &energy}, &trust),
      damping_rules("damping_rules", {&congestion, &benevolent_trust}, &damping) {
  if (trust.size() < 2)
    throw std::invalid_argument("fuzzy tables: trust axis needs at least two labels");
  for (const RuleRow& row : def.trust_rows) trust_rules.add_row(row.antecedents, row.consequent);
  trust_rules.finalize();
  for (const RuleRow& row : def.damping_rows)
    damping_rules.add_row(row.antecedents, row.consequent);
  damping_rules.finalize();
}

std::shared_ptr<const FuzzyTables> FuzzyTables::bundled() {
  return std::shared_ptr<const FuzzyTables>(new FuzzyTables(Definition{}));
}

std::shared_ptr<const FuzzyTables> FuzzyTables::from_json(const nlohmann::json& spec) {
  if (!spec.is_object()) throw std::invalid_argument("fuzzy tables: override must be an object");
  Definition def;
  for (const auto& [key, value] : spec.items()) {
    if (key == "partitions") {
      for (const auto& [axis, ranges] : value.items()) {
        if (axis == "transmission")
          def.transmission = ranges_from_json(ranges, axis);
        else if (axis == "latency")
          def.latency = ranges_from_json(ranges, axis);
        else if (axis == "energy")
          def.energy = ranges_from_json(ranges, axis);
        else if (axis == "trust")
          def.trust = ranges_from_json(ranges, axis);
        else if (axis == "congestion")
          def.congestion = ranges_from_json(ranges, axis);
        else if (axis == "damping")
          def.damping = ranges_from_json(ranges, axis);
        else
          throw std::invalid_argument("fuzzy tables: unknown axis '" + axis + "'");
      }
    } else if (key == "trust_rules") {
      def.trust_rows = rows_from_json(value, key);
    } else if (key == "damping_rules") {
      def.damping_rows = rows_from_json(value, key);
    } else {
      throw std::invalid_argument("fuzzy tables: unknown key '" + key + "'");
    }
  }
  return std::shared_ptr<const FuzzyTables>(new FuzzyTables(def));
}

std::vector<const FuzzyPartition*> FuzzyTables::ruspini_partitions() const {
  return {&transmission, &latency, &energy, &trust, &congestion, &damping};
}

const FuzzyTables& default_tables() {
  static const std::shared_ptr<const FuzzyTables> tables = FuzzyTables::bundled();
  return *tables;
}

}  // namespace tfcc
