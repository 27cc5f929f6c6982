#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "keceni/kernel.hpp"
#include "keceni/transport.hpp"

namespace keceni {

/// First-order (M-estimator) linearization of a fitted parametric model:
/// β̂ - β̄ ≈ bread_inverse · Σ_i scores.row(i)ᵀ.
struct Linearization {
  Eigen::MatrixXd bread_inverse;
  Eigen::MatrixXd scores;  // one row per node; zero for units not used in the fit
  double condition_number = 1.0;
};

struct ParametricFit {
  Eigen::VectorXd beta;
  Linearization linearization;
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Ordinary least squares. Throws NumericError naming collinear columns when Z
/// is rank deficient; no pseudo-inverse fallback.
ParametricFit fit_least_squares(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                                std::span<const std::string> column_names = {});

struct LogisticOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;  // sup-norm of the penalized score
  double ridge = 1e-8;
  double separation_norm = 10.0;
};

/// Bernoulli maximum likelihood by IRLS with step halving; a small ridge is
/// always added. Throws InputError for non-binary or single-class targets and
/// NumericError on non-convergence or complete separation.
ParametricFit fit_logistic_regression(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const LogisticOptions& opts = {});

/// Bernoulli log-likelihood Σ y η - log(1 + e^η) (no penalty).
double logistic_log_likelihood(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& beta);
/// Its gradient Zᵀ(y - expit(Zβ)).
Eigen::VectorXd logistic_gradient(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, const Eigen::VectorXd& beta);

/// Key of a kernel regressor: a fixed-width ego vector, plus (for the
/// Wasserstein metric) the multiset of neighbor vectors.
struct KernelKey {
  std::vector<double> ego;
  PointMultiset neighbors;
};

enum class KeyMetric { l1, wasserstein };

/// Nadaraya-Watson regressor with a compact kernel over key distances:
///   l1:          ‖ego - ego'‖₁
///   wasserstein: ‖ego - ego'‖₁ + W1(neighbors, neighbors') with l1 ground cost;
///                an empty multiset stands for a point mass at `empty_anchor`.
/// If no training key falls inside the bandwidth the nearest key's target is
/// returned. Predictions are memoized per canonical key.
class KernelRegressor {
 public:
  KernelRegressor(std::vector<KernelKey> keys, std::vector<double> targets, double bandwidth, KeyMetric metric,
                  KernelShape shape = KernelShape::triangular, std::vector<double> empty_anchor = {});

  double predict(const KernelKey& query) const;
  double distance(const KernelKey& a, const KernelKey& b) const;

  double bandwidth() const { return bandwidth_; }
  KeyMetric metric() const { return metric_; }
  KernelShape shape() const { return shape_; }
  std::size_t distinct_keys() const { return groups_.size(); }
  double target_min() const { return target_min_; }
  double target_max() const { return target_max_; }

 private:
  struct Group {
    KernelKey key;
    std::vector<double> neighbor_mean;
    std::uint32_t set_id = 0;          // interned neighbor multiset
    std::vector<double> potentials;    // cube_potentials of the neighbors, if on a binary cube
    double target_sum = 0.0;
    double count = 0.0;
  };

  double lower_bound(const KernelKey& q, const std::vector<double>& q_mean, const Group& g) const;
  double predict_uncached(const KernelKey& query) const;
  std::uint32_t intern(const PointMultiset& m) const;
  /// Key distance from a query (with interned neighbor set) to a group.
  double group_distance(const KernelKey& q, std::uint32_t q_set, std::span<const double> q_potentials,
                        const Group& g) const;

  std::vector<Group> groups_;
  double bandwidth_;
  KeyMetric metric_;
  KernelShape shape_;
  std::vector<double> anchor_;
  double target_min_ = 0.0;
  double target_max_ = 0.0;

  mutable std::mutex memo_mutex_;
  mutable std::unordered_map<std::string, double> memo_;
  // Neighbor multisets by proportion-normalized form; W1 only sees proportions.
  mutable std::unordered_map<std::string, std::uint32_t> set_ids_;
  mutable std::unordered_map<std::uint64_t, double> w1_cache_;
};

/// Canonical byte string of a multiset with counts divided by their gcd, so
/// multisets with equal proportions (equal uniform measures) coincide.
std::string canonical_measure(const PointMultiset& m);

/// Canonical byte string of a key (neighbor points sorted); equal keys map to
/// equal strings.
std::string canonical_key(const KernelKey& key);

/// Median of pairwise key distances over an evenly spaced subsample of at most
/// `max_points` keys.
double median_pairwise_distance(std::span<const KernelKey> keys, KeyMetric metric, std::span<const double> anchor,
                                std::size_t max_points = 300);

/// Leave-one-out squared-error choice among candidate bandwidths (smallest on ties).
double select_bandwidth_loocv(std::span<const KernelKey> keys, std::span<const double> targets, KeyMetric metric,
                              std::span<const double> anchor, std::span<const double> grid,
                              KernelShape shape = KernelShape::triangular);

}  // namespace keceni
