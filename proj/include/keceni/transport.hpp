#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace keceni {

/// Finite multiset of points in R^d, stored as distinct points with counts.
/// The associated measure is uniform over the multiset's elements.
class PointMultiset {
 public:
  PointMultiset() = default;
  explicit PointMultiset(std::size_t dim) : dim_(dim) {}

  /// `flat` holds points row-major, `dim` coordinates each.
  static PointMultiset from_points(std::size_t dim, std::span<const double> flat);

  void add(std::span<const double> point, std::int64_t count = 1);

  std::size_t dim() const { return dim_; }
  std::size_t distinct() const { return counts_.size(); }
  std::int64_t total() const { return total_; }
  bool empty() const { return total_ == 0; }
  std::span<const double> point(std::size_t k) const { return {coords_.data() + k * dim_, dim_}; }
  std::int64_t count(std::size_t k) const { return counts_[k]; }

  /// Mean point (size dim).
  std::vector<double> mean() const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

/// Exact W1 between the uniform empirical measures of two nonempty real samples,
/// via the quantile-function formula with merged breakpoints.
double w1_real_line(std::span<const double> a, std::span<const double> b);

struct TransportOptions {
  std::int64_t size_cap = 64;  // max multiset size on either side
  double certify_tol = 1e-9;
};

/// Exact W1 (l1 ground cost) between the uniform measures of two nonempty
/// multisets, solved as an integer-scaled min-cost flow. Throws InputError if
/// a side is empty or exceeds the size cap; NumericError if the optimality
/// certificate fails.
double w1_discrete(const PointMultiset& a, const PointMultiset& b, const TransportOptions& opts = {});

/// Optimal value of the transportation problem with integer supplies/demands
/// of equal total and the given dense cost matrix (rows x cols).
double min_cost_transport(std::span<const std::int64_t> supply, std::span<const std::int64_t> demand,
                          std::span<const double> cost, double certify_tol = 1e-9);

/// Fast exact W1 for multisets whose points all lie on {0,1}^d, d <= kMaxCubeDim.
/// The l1 cost is then the cube's graph metric, and W1 is the largest
/// <φ, a - b> over the (integral) vertices of the 1-Lipschitz polytope.
inline constexpr std::size_t kMaxCubeDim = 3;

bool on_binary_cube(const PointMultiset& m);
/// <φ_k, proportions of m> for every candidate potential φ_k of the cube.
std::vector<double> cube_potentials(const PointMultiset& m);
/// W1 from two cube_potentials vectors of the same dimension.
double cube_w1(std::span<const double> pa, std::span<const double> pb);
double w1_binary_cube(const PointMultiset& a, const PointMultiset& b);

}  // namespace keceni
