#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "keceni/random.hpp"

namespace keceni {

/// Product-form covariate law: every neighborhood position draws an
/// independent row from a finite weighted support. The empirical product
/// measure uses the observed rows with uniform weights (duplicates merged).
class CovariateDistribution {
 public:
  CovariateDistribution() = default;

  static CovariateDistribution empirical(const Eigen::MatrixXd& x);
  /// Known finite law (used by oracles); weights are normalized.
  static CovariateDistribution finite_law(const Eigen::MatrixXd& support, std::vector<double> weights);

  std::size_t support_size() const { return weights_.size(); }
  std::size_t width() const { return p_; }
  const double* row(std::size_t k) const { return support_.data() + k * p_; }
  double weight(std::size_t k) const { return weights_[k]; }

  /// Support index of observed data row i (empirical laws only).
  std::size_t support_index_of(std::size_t data_row) const { return data_to_support_.at(data_row); }
  bool has_data_mapping() const { return !data_to_support_.empty(); }

  std::size_t sample(Rng& rng) const;

 private:
  std::size_t p_ = 0;
  std::vector<double> support_;  // row-major
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  bool uniform_ = true;
  std::vector<std::size_t> data_to_support_;
};

/// m profiles over `positions` nodes; profile[d][k] is a support index.
/// Deterministic given seed.
std::vector<std::vector<std::size_t>> sample_covariate_profiles(const CovariateDistribution& cd, std::size_t positions,
                                                                std::size_t m, std::uint64_t seed);

}  // namespace keceni
