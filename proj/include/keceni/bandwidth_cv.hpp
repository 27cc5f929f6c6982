#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "keceni/estimator.hpp"

namespace keceni {

struct CVResult {
  std::vector<double> grid;           // ascending
  std::vector<double> mse;            // +inf where no node had kernel mass
  std::vector<std::size_t> n_used;
  std::vector<std::size_t> n_skipped;
  double chosen = 0.0;
  std::vector<NodeId> nodes;                      // nodes that served as held-out targets
  std::vector<double> xi;                         // their pseudo-outcomes
  std::vector<std::vector<double>> theta_minus;   // [node][grid], NaN if undefined

  nlohmann::json to_json() const;
  void write_csv(const std::filesystem::path& path) const;
};

/// 10 geometric points from the 5th percentile of positive Δ to max Δ, where Δ
/// is pooled over node pairs (each node's observed configuration as target;
/// at most 500 evenly spaced targets).
std::vector<double> default_bandwidth_grid(const Dataset& ds, const DissimilarityMetric& metric, std::size_t points = 10);

/// Leave-neighborhood-out choice of λ: for every node i the target is its own
/// observed configuration, N_i^{(2)} is excluded, and the error is
/// ξ̂_i - θ̂_i^{(-N_i^{(2)})}. Ties go to the smallest λ. Throws NumericError
/// ("grid too narrow") when every λ is undefined.
CVResult cv_select(const Dataset& ds, const NeighborhoodIndex& index, std::span<const PseudoOutcome> po,
                   const DissimilarityMetric& metric, KernelShape shape, std::span<const double> grid, int threads = 1);

}  // namespace keceni
