#include "keceni/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "keceni/error.hpp"

namespace keceni {

int TreatmentScenario::value(NodeId node) const {
  const auto it = std::lower_bound(assignment.begin(), assignment.end(), node,
                                   [](const auto& a, NodeId v) { return a.first < v; });
  if (it == assignment.end() || it->first != node)
    throw std::out_of_range("node " + std::to_string(node) + " is not assigned by the scenario");
  return it->second;
}

LocalTreatment TreatmentScenario::local() const {
  LocalTreatment lt;
  for (const auto& [node, v] : assignment) {
    if (node == target)
      lt.self = v;
    else
      lt.neighbors.push_back(v);
  }
  return lt;
}

void validate_scenario(const Graph& g, const TreatmentScenario& sc) {
  if (sc.target < 0 || static_cast<std::size_t>(sc.target) >= g.size())
    throw InputError("scenario target " + std::to_string(sc.target) + " is not a node of the graph");
  const auto hood = closed_neighborhood(g, sc.target);
  for (std::size_t k = 0; k + 1 < sc.assignment.size(); ++k)
    if (sc.assignment[k].first >= sc.assignment[k + 1].first)
      throw InputError("scenario assignment must list each node once, sorted");
  for (const auto& [node, v] : sc.assignment) {
    if (!std::binary_search(hood.begin(), hood.end(), node))
      throw InputError("scenario assigns node " + std::to_string(node) + " outside the target's closed neighborhood");
    if (v != 0 && v != 1) throw InputError("scenario values must be 0/1 (node " + std::to_string(node) + ")");
  }
  for (NodeId j : hood) {
    const bool present = std::any_of(sc.assignment.begin(), sc.assignment.end(), [&](const auto& a) { return a.first == j; });
    if (!present) throw InputError("scenario assignment is missing neighbor " + std::to_string(j));
  }
}

TreatmentScenario parse_scenario(const std::string& json_text, const Dataset& ds) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("scenario JSON: ") + e.what());
  }
  auto id_string = [](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw InputError("scenario ids must be strings or integers");
  };
  if (!doc.is_object() || !doc.contains("target") || !doc.contains("assignment") || !doc["assignment"].is_object())
    throw InputError("scenario JSON must have 'target' and an 'assignment' object");
  TreatmentScenario sc;
  sc.target = node_index(ds, id_string(doc["target"]));
  for (const auto& [key, value] : doc["assignment"].items()) {
    int v = -1;
    if (value.is_number_integer()) v = value.get<int>();
    else if (value.is_boolean()) v = value.get<bool>() ? 1 : 0;
    if (v != 0 && v != 1) throw InputError("scenario value for '" + key + "' must be 0 or 1");
    sc.assignment.emplace_back(node_index(ds, key), v);
  }
  std::sort(sc.assignment.begin(), sc.assignment.end());
  validate_scenario(ds.graph, sc);
  return sc;
}

TreatmentScenario load_scenario(const std::filesystem::path& json_path, const Dataset& ds) {
  std::ifstream in(json_path);
  if (!in) throw InputError("cannot open scenario file " + json_path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), ds);
}

std::string scenario_to_json(const TreatmentScenario& sc, const Dataset& ds) {
  nlohmann::json doc;
  doc["target"] = ds.ids.at(sc.target);
  nlohmann::json a = nlohmann::json::object();
  for (const auto& [node, v] : sc.assignment) a[ds.ids.at(node)] = v;
  doc["assignment"] = a;
  return doc.dump();
}

LocalTreatment observed_local_treatment(const Dataset& ds, NodeId i) {
  LocalTreatment lt;
  lt.self = ds.t[i];
  const auto nb = ds.graph.neighbors(i);
  lt.neighbors.reserve(nb.size());
  for (NodeId j : nb) lt.neighbors.push_back(ds.t[j]);
  return lt;
}

TreatmentScenario observed_scenario(const Dataset& ds, NodeId i) {
  TreatmentScenario sc;
  sc.target = i;
  for (NodeId j : closed_neighborhood(ds.graph, i)) sc.assignment.emplace_back(j, ds.t[j]);
  return sc;
}

}  // namespace keceni
