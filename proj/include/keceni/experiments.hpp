#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "keceni/bandwidth_cv.hpp"
#include "keceni/simgen.hpp"
#include "keceni/variance.hpp"

namespace keceni {

enum class Scale { smoke, desk, full };

Scale parse_scale(std::string_view name);
std::string to_string(Scale scale);

struct RunOptions {
  std::uint64_t seed = 20240501;
  int threads = 1;
  McOptions mc;
  KernelShape shape = KernelShape::triangular;
  std::function<void(const std::string&)> progress;  // optional log sink
};

/// One row of the estimates table.
struct EstimateRow {
  std::size_t rep = 0;
  NodeId target = 0;
  std::string scenario;
  double theta = 0.0;
  double d_hat = 0.0;
  double lambda = 0.0;
  double sigma = 0.0;  // NaN when no variance was computed
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

void write_estimates_csv(const std::filesystem::path& path, const std::vector<EstimateRow>& rows);

/// Nuisances, pseudo-outcomes and the CV bandwidth of one dataset.
struct FittedReplication {
  NeighborhoodIndex index;
  NuisanceBundle nuisances;
  std::vector<PseudoOutcome> po;
  CVResult cv;
};

FittedReplication fit_replication(const Dataset& ds, const NuisanceSpec& spec, const DissimilarityMetric& metric,
                                  const RunOptions& opts, std::uint64_t seed);

/// θ̂ at the CV bandwidth. If the target has no kernel mass there, the
/// bandwidth is raised to the smallest grid value above min Δ (or 2·min Δ).
Estimate estimate_with_fallback(const Dataset& ds, const FittedReplication& fit, const DissimilarityMetric& metric,
                                KernelShape shape, const TreatmentScenario& sc);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Node-wise recovery with the SUTVA-AIPW negative control.
struct NodewiseConfig {
  std::size_t n = 500;
  std::size_t reps = 40;
  double rho = 2.0;
  double beta = 10.0;
  NodewiseCoefficients coef;

  static NodewiseConfig at(Scale scale);
};

struct NodewiseResult {
  NodeId target = 0;
  std::size_t target_degree = 0;
  double truth1 = 0.0;  // all treated
  double truth0 = 0.0;  // none treated
  std::vector<double> theta1, theta0, aipw;
  std::vector<EstimateRow> rows;
  double seconds = 0.0;

  double mean1() const;
  double mean0() const;
  double mean_difference() const;
  double mean_aipw() const;
};

NodewiseResult run_nodewise(const NodewiseConfig& cfg, const RunOptions& opts);

// Double-robustness grid over fitting-stage misspecification.
struct DrConfig {
  std::size_t n = 500;
  std::size_t reps = 20;
  double rho = 2.0;
  double beta = 10.0;
  NodewiseCoefficients coef;
  std::vector<double> alphas{0.0, 0.5, 1.0};
  std::size_t g_draws = 2000;  // G-computation integral draws

  static DrConfig at(Scale scale);
};

struct DrCell {
  double alpha_pi = 0.0;
  double alpha_mu = 0.0;
  double rmse_g = 0.0;
  double rmse_keceni = 0.0;
};

struct DrResult {
  NodeId target = 0;
  double truth0 = 0.0;  // ego untreated, half the neighbors treated
  double truth1 = 0.0;  // ego treated
  std::vector<DrCell> cells;
  std::vector<EstimateRow> rows;
  double seconds = 0.0;

  /// Throws std::out_of_range if the cell was not run.
  const DrCell& cell(double alpha_pi, double alpha_mu) const;
};

DrResult run_dr_grid(const DrConfig& cfg, const RunOptions& opts);

// Sandwich-variance coverage in the double-robustness world.
struct CoverageConfig {
  std::size_t n = 500;
  std::size_t reps = 40;
  double rho = 2.0;
  double beta = 10.0;
  NodewiseCoefficients coef;
  std::vector<std::pair<double, double>> settings{{0.0, 0.0}};  // (alpha_pi, alpha_mu)
  std::vector<VarianceMode> modes{VarianceMode::simple, VarianceMode::full};
  VarianceOptions variance;

  static CoverageConfig at(Scale scale);
};

struct CoverageRow {
  std::string setting;  // e.g. "pi=0,mu=0,simple"
  std::string estimand; // theta0 | theta1 | difference
  double coverage = 0.0;
  double mean_sigma = 0.0;
  double sd_estimate = 0.0;
};

struct CoverageResult {
  double truth0 = 0.0;
  double truth1 = 0.0;
  std::vector<CoverageRow> rows;
  std::vector<EstimateRow> estimates;
  double seconds = 0.0;

  double coverage(const std::string& setting, const std::string& estimand) const;
};

std::string coverage_setting(double alpha_pi, double alpha_mu, VarianceMode mode);
CoverageResult run_coverage(const CoverageConfig& cfg, const RunOptions& opts);

// Population-averaged counterfactual means in the binary world.
struct AteConfig {
  std::size_t n = 2000;
  std::size_t reps = 10;
  double rho = 2.0;
  double beta = 10.0;
  AteCoefficients coef;
  NuisanceSpec nuisance = default_spec();

  static AteConfig at(Scale scale);
  static NuisanceSpec default_spec();
};

struct AteResult {
  double truth0 = 0.0;
  double truth1 = 0.0;
  std::vector<double> mean0, mean1;  // per replication, averaged over nodes
  std::vector<double> lambda;
  double seconds = 0.0;

  double avg0() const;
  double avg1() const;
  double ate() const { return avg1() - avg0(); }
};

AteResult run_ate(const AteConfig& cfg, const RunOptions& opts);

// RMSE against sample size on nested subgraphs of one latent draw.
struct ScalingConfig {
  std::vector<std::size_t> sizes{250, 500, 1000, 2000};
  std::size_t reps = 20;
  std::size_t pre_n = 4000;
  double half_width = 2.0;
  double rho = 2.0;
  double beta = 10.0;
  NodewiseCoefficients coef;

  static ScalingConfig at(Scale scale);
};

struct ScalingResult {
  std::vector<std::size_t> sizes;
  std::vector<double> rmse;  // pooled over the all- and none-treated scenarios
  std::vector<std::size_t> target_degree;
  double slope = 0.0;        // OLS of log rmse on log n
  double seconds = 0.0;
};

ScalingResult run_scaling(const ScalingConfig& cfg, const RunOptions& opts);

/// OLS slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

// Threshold checks used by `reproduce` reports and the acceptance binary.
std::vector<Check> nodewise_checks(const NodewiseResult& r);
std::vector<Check> sutva_checks(const NodewiseResult& r);
std::vector<Check> dr_checks(const DrResult& r);
std::vector<Check> coverage_checks(const CoverageResult& r);
std::vector<Check> ate_checks(const AteResult& r);
std::vector<Check> scaling_checks(const ScalingResult& r);

void write_rmse_grid_csv(const std::filesystem::path& path, const DrResult& r);
void write_scaling_csv(const std::filesystem::path& path, const ScalingResult& r);
void write_coverage_csv(const std::filesystem::path& path, const CoverageResult& r);
void write_checks(const std::filesystem::path& path, const std::vector<Check>& checks);

}  // namespace keceni
