#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "keceni/dataset.hpp"
#include "keceni/features.hpp"

namespace keceni {

/// Positions of a node's one- and two-hop neighborhoods inside its sorted
/// two-hop member list N_i^{(2)}.
struct LocalStructure {
  NodeId node = 0;
  std::vector<NodeId> members;                 // N_i^{(2)}, sorted
  std::vector<NodeId> hood;                    // N_i as [i, neighbors...]
  std::size_t self_pos = 0;
  std::vector<std::size_t> hood_pos;           // member position of hood[k]
  std::vector<std::size_t> outer_pos;          // N_i^{(2)} \ {i}
  std::vector<std::vector<std::size_t>> hood_neighbor_pos;  // N_{hood[k]} \ {hood[k]}
};

/// Per-node local structures for a whole graph plus a row-major covariate copy.
class NeighborhoodIndex {
 public:
  NeighborhoodIndex() = default;
  explicit NeighborhoodIndex(const Dataset& ds);

  std::size_t size() const { return locals_.size(); }
  const LocalStructure& at(NodeId i) const { return locals_[i]; }
  const double* row(NodeId i) const { return rows_.data() + static_cast<std::size_t>(i) * p_; }
  std::size_t covariate_width() const { return p_; }

  /// Treatments of N_i in hood order ([i, neighbors...]).
  std::vector<int> hood_treatments(const Dataset& ds, NodeId i) const;

 private:
  std::vector<LocalStructure> locals_;
  std::vector<double> rows_;
  std::size_t p_ = 0;
};

/// Covariate rows bound to the members of one node's two-hop neighborhood;
/// produces the regressor contexts for that node and its neighbors.
class LocalFrame {
 public:
  explicit LocalFrame(const LocalStructure& s);

  const LocalStructure& structure() const { return *s_; }

  /// One row pointer per member, aligned with structure().members.
  void bind(std::span<const double* const> member_rows);
  void bind_observed(const NeighborhoodIndex& index);

  /// Outcome context at the ego; hood_t aligned with structure().hood.
  OutcomeContext outcome_context(std::span<const int> hood_t) const;
  /// Node-level context for hood[k].
  NodeContext node_context(std::size_t k) const;

 private:
  const LocalStructure* s_;
  std::vector<const double*> member_rows_;
  std::vector<const double*> outer_;
  std::vector<std::vector<const double*>> hood_neighbors_;
};

}  // namespace keceni
