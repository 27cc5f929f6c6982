#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "keceni/dataset.hpp"

namespace keceni {

/// Treatments on a closed neighborhood, reduced to what dissimilarities need:
/// the ego's value and the multiset of its neighbors' values.
struct LocalTreatment {
  int self = 0;
  std::vector<int> neighbors;
};

/// Hypothetical intervention t*_{N_{i*}} on the closed neighborhood of a target.
struct TreatmentScenario {
  NodeId target = 0;
  std::vector<std::pair<NodeId, int>> assignment;  // sorted by node

  /// Throws std::out_of_range if `node` is not assigned.
  int value(NodeId node) const;
  LocalTreatment local() const;

  bool operator==(const TreatmentScenario&) const = default;
};

/// Throws InputError unless the assignment keys equal closed_neighborhood(target)
/// and every value is 0/1.
void validate_scenario(const Graph& g, const TreatmentScenario& sc);

/// Parses `{"target": <id>, "assignment": {"<id>": 0|1, ...}}`, resolving
/// external ids through ds.ids, and validates the result.
TreatmentScenario load_scenario(const std::filesystem::path& json_path, const Dataset& ds);
TreatmentScenario parse_scenario(const std::string& json_text, const Dataset& ds);
std::string scenario_to_json(const TreatmentScenario& sc, const Dataset& ds);

/// Observed (i, T_{N_i}) configuration.
LocalTreatment observed_local_treatment(const Dataset& ds, NodeId i);

/// The observed configuration of node i packaged as a scenario.
TreatmentScenario observed_scenario(const Dataset& ds, NodeId i);

}  // namespace keceni
