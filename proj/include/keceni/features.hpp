#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace keceni {

/// Inputs of the outcome regression at node i: treatments on N_i and covariate
/// rows over N_i^{(2)}. Each pointer addresses a row of `p` covariates.
struct OutcomeContext {
  int t_self = 0;
  std::span<const int> t_neighbors;          // N_i \ {i}
  const double* x_self = nullptr;
  std::span<const double* const> x_neighbors;  // N_i \ {i}
  std::span<const double* const> x_outer;      // N_i^{(2)} \ {i}
};

/// Inputs of the node-level propensity at node j: covariate rows over N_j.
struct NodeContext {
  const double* x_self = nullptr;
  std::span<const double* const> x_neighbors;  // N_j \ {j}
};

/// Avg(v_{N_i \ {i}}) with the isolated-node convention Avg(∅) = 0.
double neighbor_average(std::span<const double> values);

/// w(x) = (x1 - 0.5)(x2 - 0.5).
inline double interaction(const double* x) { return (x[0] - 0.5) * (x[1] - 0.5); }

inline double expit(double v) {
  return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
}

enum class FeatureTarget { outcome, node };

/// Named, deterministic regressor construction. Catalog:
///   nodewise-outcome   (1, t_i-.5, Avg(t-.5), x_i, Avg(x over N^{(2)}\i))
///   dr-outcome         same with x -> (1-a)x + a x^2
///   nodewise-propensity (1, x_j, Avg(x over N_j\j)); dr-propensity likewise
///   ate-outcome        (1, t_i-.5, Avg(t-.5), w(x_i), Avg(w(x) over N_i\i))
///   ate-propensity     (1, w(x_j), Avg(w(x) over N_j\j))
///   ate-summary        (t_i, Avg(t-.5), x_i, Avg(x over N_i\i))
///   ate-summary-propensity (x_j, Avg(x over N_j\j))
///   sutva-covariates   (1, x_j)
class FeatureMap {
 public:
  FeatureMap() = default;

  /// Throws InputError for unknown names or covariate widths a map cannot use.
  static FeatureMap from_name(std::string_view name, std::size_t covariate_width, double alpha = 0.0);

  const std::string& name() const { return name_; }
  double alpha() const { return alpha_; }
  std::size_t width() const { return width_; }
  std::size_t covariate_width() const { return p_; }
  FeatureTarget target() const { return target_; }
  const std::vector<std::string>& column_names() const { return columns_; }

  void outcome(const OutcomeContext& ctx, std::span<double> out) const;
  void node(const NodeContext& ctx, std::span<double> out) const;

 private:
  enum class Kind { mixed_outcome, mixed_node, ate_outcome, ate_node, summary_outcome, summary_node, sutva };

  double transform(double v) const { return (1.0 - alpha_) * v + alpha_ * v * v; }

  std::string name_;
  Kind kind_ = Kind::sutva;
  FeatureTarget target_ = FeatureTarget::node;
  double alpha_ = 0.0;
  std::size_t p_ = 0;
  std::size_t width_ = 0;
  std::vector<std::string> columns_;
};

std::vector<std::string> builtin_feature_maps();

}  // namespace keceni
