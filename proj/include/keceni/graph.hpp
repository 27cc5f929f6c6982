#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace keceni {

using NodeId = int;
using Edge = std::pair<NodeId, NodeId>;

/// Undirected simple graph over dense ids 0..n-1, stored as CSR with sorted,
/// deduplicated neighbor lists. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  /// Builds the symmetric adjacency. Self-loops are dropped and duplicate or
  /// reversed edges collapse. Throws InputError for ids outside [0, n).
  static Graph build(std::size_t n, std::span<const Edge> edges);

  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return adjacency_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId i) const {
    return {adjacency_.data() + offsets_[i], adjacency_.data() + offsets_[i + 1]};
  }
  std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }

  bool has_edge(NodeId i, NodeId j) const;

  /// Edges as (i, j) with i < j, in lexicographic order.
  std::vector<Edge> edges() const;

  /// Subgraph induced by `nodes`; node nodes[k] becomes id k.
  Graph induced(std::span<const NodeId> nodes) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
};

/// N_i = {i} ∪ adjacency(i), sorted.
std::vector<NodeId> closed_neighborhood(const Graph& g, NodeId i);

/// All nodes within k hops of i, sorted. k = 0 gives {i}.
std::vector<NodeId> k_hop(const Graph& g, NodeId i, int k);

/// True iff the graph distance between i and j is at most `radius`.
bool dependence_indicator(const Graph& g, NodeId i, NodeId j, int radius);

/// (node, distance) pairs for every node within `radius` hops of `source`,
/// in BFS order (source first).
std::vector<std::pair<NodeId, int>> ball(const Graph& g, NodeId source, int radius);

}  // namespace keceni
