#include "keceni/local.hpp"

#include <algorithm>

#include "keceni/kernel.hpp"
#include "keceni/error.hpp"

namespace keceni {

KernelShape parse_kernel_shape(std::string_view name) {
  if (name == "triangular") return KernelShape::triangular;
  if (name == "box") return KernelShape::box;
  throw InputError("unknown kernel shape '" + std::string(name) + "' (expected triangular|box)");
}

std::string to_string(KernelShape shape) { return shape == KernelShape::box ? "box" : "triangular"; }

NeighborhoodIndex::NeighborhoodIndex(const Dataset& ds) : p_(ds.covariate_width()) {
  const auto n = ds.size();
  rows_.resize(n * p_);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < p_; ++c)
      rows_[i * p_ + c] = ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));

  const auto& g = ds.graph;
  locals_.resize(n);
  for (std::size_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<NodeId>(ii);
    auto& s = locals_[ii];
    s.node = i;
    s.hood.push_back(i);
    for (NodeId j : g.neighbors(i)) s.hood.push_back(j);
    s.members = k_hop(g, i, 2);
    auto pos = [&](NodeId v) {
      return static_cast<std::size_t>(std::lower_bound(s.members.begin(), s.members.end(), v) - s.members.begin());
    };
    s.self_pos = pos(i);
    for (NodeId v : s.hood) s.hood_pos.push_back(pos(v));
    for (std::size_t k = 0; k < s.members.size(); ++k)
      if (k != s.self_pos) s.outer_pos.push_back(k);
    for (NodeId v : s.hood) {
      std::vector<std::size_t> nn;
      for (NodeId w : g.neighbors(v)) nn.push_back(pos(w));
      s.hood_neighbor_pos.push_back(std::move(nn));
    }
  }
}

std::vector<int> NeighborhoodIndex::hood_treatments(const Dataset& ds, NodeId i) const {
  std::vector<int> t;
  for (NodeId v : locals_[i].hood) t.push_back(ds.t[v]);
  return t;
}

LocalFrame::LocalFrame(const LocalStructure& s) : s_(&s) {
  member_rows_.resize(s.members.size(), nullptr);
  outer_.resize(s.outer_pos.size(), nullptr);
  hood_neighbors_.resize(s.hood.size());
  for (std::size_t k = 0; k < s.hood.size(); ++k) hood_neighbors_[k].resize(s.hood_neighbor_pos[k].size(), nullptr);
}

void LocalFrame::bind(std::span<const double* const> member_rows) {
  std::copy(member_rows.begin(), member_rows.end(), member_rows_.begin());
  for (std::size_t k = 0; k < s_->outer_pos.size(); ++k) outer_[k] = member_rows_[s_->outer_pos[k]];
  for (std::size_t k = 0; k < s_->hood.size(); ++k) {
    const auto& nn = s_->hood_neighbor_pos[k];
    for (std::size_t q = 0; q < nn.size(); ++q) hood_neighbors_[k][q] = member_rows_[nn[q]];
  }
}

void LocalFrame::bind_observed(const NeighborhoodIndex& index) {
  std::vector<const double*> rows(s_->members.size());
  for (std::size_t k = 0; k < rows.size(); ++k) rows[k] = index.row(s_->members[k]);
  bind(rows);
}

OutcomeContext LocalFrame::outcome_context(std::span<const int> hood_t) const {
  OutcomeContext ctx;
  ctx.t_self = hood_t[0];
  ctx.t_neighbors = hood_t.subspan(1);
  ctx.x_self = member_rows_[s_->self_pos];
  ctx.x_neighbors = hood_neighbors_[0];
  ctx.x_outer = outer_;
  return ctx;
}

NodeContext LocalFrame::node_context(std::size_t k) const {
  NodeContext ctx;
  ctx.x_self = member_rows_[s_->hood_pos[k]];
  ctx.x_neighbors = hood_neighbors_[k];
  return ctx;
}

}  // namespace keceni
