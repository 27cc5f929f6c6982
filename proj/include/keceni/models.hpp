#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "keceni/covariates.hpp"
#include "keceni/dataset.hpp"
#include "keceni/features.hpp"
#include "keceni/local.hpp"
#include "keceni/regression.hpp"

namespace keceni {

enum class ModelKind { linear, logistic, kernel, custom };

/// How kernel-regressor keys are formed from a local context.
///   summary:     ego = the feature map's summary vector, l1 metric
///   wasserstein: ego = own (t, x) or x, neighbors = multiset of the same over N \ {self}
enum class KeyMode { summary, wasserstein };

ModelKind parse_model_kind(std::string_view name);
std::string to_string(ModelKind kind);
KeyMode parse_key_mode(std::string_view name);

KernelKey outcome_key(const OutcomeContext& ctx, KeyMode mode, const FeatureMap& fm);
KernelKey node_key(const NodeContext& ctx, KeyMode mode, const FeatureMap& fm);

/// Fitted outcome regression μ̂(t_{N_i}, x_{N_i^{(2)}}).
class OutcomeModel {
 public:
  using Function = std::function<double(const OutcomeContext&)>;

  static OutcomeModel parametric(ModelKind kind, FeatureMap fm, Eigen::VectorXd beta,
                                 std::optional<Linearization> lin = std::nullopt);
  static OutcomeModel nonparametric(std::shared_ptr<const KernelRegressor> reg, KeyMode mode, FeatureMap fm);
  static OutcomeModel custom(Function f);

  double predict(const OutcomeContext& ctx) const;
  /// ∂μ̂/∂β at ctx; parametric kinds only.
  void gradient(const OutcomeContext& ctx, std::span<double> out) const;

  ModelKind kind() const { return kind_; }
  bool is_parametric() const { return kind_ == ModelKind::linear || kind_ == ModelKind::logistic; }
  const FeatureMap& feature_map() const { return fm_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  const Linearization* linearization() const { return lin_ ? &*lin_ : nullptr; }
  const KernelRegressor* regressor() const { return reg_.get(); }

  nlohmann::json to_json() const;
  /// Parametric models only.
  static OutcomeModel from_json(const nlohmann::json& j, std::size_t covariate_width);

 private:
  ModelKind kind_ = ModelKind::custom;
  FeatureMap fm_;
  Eigen::VectorXd beta_;
  std::optional<Linearization> lin_;
  std::shared_ptr<const KernelRegressor> reg_;
  KeyMode mode_ = KeyMode::wasserstein;
  Function fn_;
};

/// Node-level propensity π̂°(t_j | x_{N_j}), clamped to [ε, 1-ε].
class PropensityModel {
 public:
  using Function = std::function<double(const NodeContext&)>;

  static PropensityModel parametric(FeatureMap fm, Eigen::VectorXd beta, double epsilon = 1e-3,
                                    std::optional<Linearization> lin = std::nullopt);
  static PropensityModel nonparametric(std::shared_ptr<const KernelRegressor> reg, KeyMode mode, FeatureMap fm,
                                       double epsilon = 1e-3);
  /// f returns the unclamped probability of treatment.
  static PropensityModel custom(Function f, double epsilon = 1e-3);

  double treated_probability(const NodeContext& ctx) const;
  double probability(int t, const NodeContext& ctx) const;
  /// ∂ log π̂°(t | ctx)/∂β = (t - p) z, or zero where the clamp is active.
  void log_gradient(int t, const NodeContext& ctx, std::span<double> out) const;

  ModelKind kind() const { return kind_; }
  bool is_parametric() const { return kind_ == ModelKind::logistic; }
  const FeatureMap& feature_map() const { return fm_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  const Linearization* linearization() const { return lin_ ? &*lin_ : nullptr; }
  double epsilon() const { return eps_; }

  nlohmann::json to_json() const;
  static PropensityModel from_json(const nlohmann::json& j, std::size_t covariate_width);

 private:
  double raw_probability(const NodeContext& ctx) const;

  ModelKind kind_ = ModelKind::custom;
  FeatureMap fm_;
  Eigen::VectorXd beta_;
  std::optional<Linearization> lin_;
  std::shared_ptr<const KernelRegressor> reg_;
  KeyMode mode_ = KeyMode::wasserstein;
  Function fn_;
  double eps_ = 1e-3;
};

/// ∏_{k ∈ N_i} π̂°(hood_t[k] | x_{N_{hood[k]}}) on the frame's bound covariates.
double joint_propensity(const PropensityModel& pm, const LocalFrame& frame, std::span<const int> hood_t);

struct NuisanceBundle {
  std::shared_ptr<const OutcomeModel> outcome;
  std::shared_ptr<const PropensityModel> propensity;
  std::shared_ptr<const CovariateDistribution> covariates;
};

enum class BandwidthRule { median, loocv };

struct NuisanceSpec {
  ModelKind outcome_kind = ModelKind::linear;
  std::string outcome_map = "nodewise-outcome";
  double alpha_mu = 0.0;
  ModelKind propensity_kind = ModelKind::logistic;
  std::string propensity_map = "nodewise-propensity";
  double alpha_pi = 0.0;
  double epsilon = 1e-3;
  KeyMode key_mode = KeyMode::wasserstein;
  BandwidthRule bandwidth_rule = BandwidthRule::median;
  double outcome_bandwidth = 0.0;     // > 0 overrides the rule
  double propensity_bandwidth = 0.0;
  LogisticOptions logistic;
};

OutcomeModel fit_outcome_model(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceSpec& spec);
PropensityModel fit_propensity_model(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceSpec& spec);

/// μ̂, π̂° and the empirical product measure, all fitted on the full dataset.
NuisanceBundle fit_nuisances(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceSpec& spec);

}  // namespace keceni
