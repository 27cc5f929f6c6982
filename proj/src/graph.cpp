#include "keceni/graph.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "keceni/error.hpp"

namespace keceni {

Graph Graph::build(std::size_t n, std::span<const Edge> edges) {
  std::vector<std::vector<NodeId>> lists(n);
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n) {
      throw InputError("edge (" + std::to_string(i) + ", " + std::to_string(j) + ") references a node outside [0, " +
                       std::to_string(n) + ")");
    }
    if (i == j) continue;
    lists[i].push_back(j);
    lists[j].push_back(i);
  }
  Graph g;
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& l = lists[i];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    g.offsets_[i + 1] = g.offsets_[i] + l.size();
  }
  g.adjacency_.reserve(g.offsets_[n]);
  for (const auto& l : lists) g.adjacency_.insert(g.adjacency_.end(), l.begin(), l.end());
  return g;
}

bool Graph::has_edge(NodeId i, NodeId j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (NodeId i = 0; i < static_cast<NodeId>(size()); ++i)
    for (NodeId j : neighbors(i))
      if (i < j) out.emplace_back(i, j);
  return out;
}

Graph Graph::induced(std::span<const NodeId> nodes) const {
  std::unordered_map<NodeId, NodeId> local;
  local.reserve(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) local.emplace(nodes[k], static_cast<NodeId>(k));
  std::vector<Edge> sub;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    for (NodeId j : neighbors(nodes[k])) {
      auto it = local.find(j);
      if (it != local.end() && static_cast<NodeId>(k) < it->second) sub.emplace_back(static_cast<NodeId>(k), it->second);
    }
  }
  return build(nodes.size(), sub);
}

std::vector<NodeId> closed_neighborhood(const Graph& g, NodeId i) {
  const auto nb = g.neighbors(i);
  std::vector<NodeId> out;
  out.reserve(nb.size() + 1);
  auto it = std::lower_bound(nb.begin(), nb.end(), i);
  out.insert(out.end(), nb.begin(), it);
  out.push_back(i);
  out.insert(out.end(), it, nb.end());
  return out;
}

std::vector<std::pair<NodeId, int>> ball(const Graph& g, NodeId source, int radius) {
  std::vector<std::pair<NodeId, int>> out{{source, 0}};
  if (radius <= 0) return out;
  std::unordered_map<NodeId, int> seen{{source, 0}};
  std::size_t head = 0;
  while (head < out.size()) {
    const auto [v, d] = out[head++];
    if (d == radius) continue;
    for (NodeId w : g.neighbors(v)) {
      if (seen.emplace(w, d + 1).second) out.emplace_back(w, d + 1);
    }
  }
  return out;
}

std::vector<NodeId> k_hop(const Graph& g, NodeId i, int k) {
  std::vector<NodeId> out;
  if (k == 1) return closed_neighborhood(g, i);
  for (const auto& [v, d] : ball(g, i, k)) out.push_back(v);
  std::sort(out.begin(), out.end());
  return out;
}

bool dependence_indicator(const Graph& g, NodeId i, NodeId j, int radius) {
  if (i == j) return true;
  if (radius <= 0) return false;
  if (radius == 1) return g.has_edge(i, j);
  // Expand from both ends; meets within radius iff dist <= radius.
  const int r1 = radius / 2;
  const int r2 = radius - r1;
  const auto a = ball(g, i, r1);
  std::unordered_map<NodeId, int> near;
  near.reserve(a.size());
  for (const auto& [v, d] : a) near.emplace(v, d);
  for (const auto& [v, d] : ball(g, j, r2))
    if (near.contains(v)) return true;
  return false;
}

}  // namespace keceni
