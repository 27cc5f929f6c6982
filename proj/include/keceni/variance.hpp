#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "keceni/estimator.hpp"

namespace keceni {

struct XiPartials {
  double d_mu = 0.0;     // -ϖ/π
  double d_m = 1.0;
  double d_pi = 0.0;     // -(Y-μ)ϖ/π²
  double d_varpi = 0.0;  // (Y-μ)/π
};

XiPartials xi_partials(const PseudoOutcome& po);

/// Influence of unit i's score on μ̂ at `query`: ∇_β μ̂(query)ᵀ A φ_{μ,i}.
double h_mu(const OutcomeModel& model, NodeId i, const OutcomeContext& query);

/// Influence of unit i's score on the joint propensity of `hood_t` on `frame`:
/// (π̂ Σ_k ∇ log π̂°_k)ᵀ A φ_{π,i}.
double h_pi(const PropensityModel& model, NodeId i, const LocalFrame& frame, std::span<const int> hood_t);

/// ∂π̂(hood_t | frame)/∂β_π for the product form.
std::vector<double> joint_propensity_gradient(const PropensityModel& model, const LocalFrame& frame, std::span<const int> hood_t);

/// Hájek projection of ∫ f dP̂^⊗ over `positions` product positions, evaluated
/// at every support row: out[r] = (1/n) Σ_p [E(f | X_p = row r) - E f], with
/// the conditional expectations estimated from `draws` shared completions.
/// n is the number of observed rows behind the empirical law.
std::vector<double> hajek_projection(const CovariateDistribution& cd, std::size_t positions, std::size_t n,
                                     const std::function<double(std::span<const double* const>)>& f, std::size_t draws,
                                     std::uint64_t seed);

/// H_{P,i}(f) for data row i (see hajek_projection).
double h_cov(const CovariateDistribution& cd, std::size_t positions, std::size_t n,
             const std::function<double(std::span<const double* const>)>& f, NodeId i, std::size_t draws, std::uint64_t seed);

enum class VarianceMode { simple, full };

VarianceMode parse_variance_mode(std::string_view name);
std::string to_string(VarianceMode mode);

struct InfluenceVector {
  VarianceMode mode = VarianceMode::simple;
  std::vector<double> w;           // Ŵ_i, D̂⁻¹ included
  double nuisance_share = 0.0;     // share of Σ|Ŵ| carried by the propagation terms
};

struct VarianceOptions {
  VarianceMode mode = VarianceMode::simple;
  McOptions mc;                    // P̂-expectations of nuisance gradients
  std::size_t hajek_draws = 8;     // completions per Hájek conditional expectation
  int radius = 2;
  double level = 0.95;
};

/// Ŵ_i for an estimate computed from `po`. Full mode needs parametric μ̂ and π̂.
InfluenceVector influence_vector(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceBundle& nb,
                                 std::span<const PseudoOutcome> po, const Estimate& est, const VarianceOptions& opts,
                                 std::uint64_t seed, int threads = 1);

/// Ŵ(a) - Ŵ(b), the influence vector of a difference of two estimates.
InfluenceVector difference(const InfluenceVector& a, const InfluenceVector& b);

struct VarianceReport {
  double sigma2 = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double level = 0.95;
  VarianceMode mode = VarianceMode::simple;
  int radius = 2;
  bool fallback_used = false;

  double sigma() const;
  nlohmann::json to_json() const;
};

/// σ̂² = Σ_{dist(i,j) ≤ radius} Ŵ_i Ŵ_j, falling back to Σ Ŵ_i² when not positive.
VarianceReport hac_variance(const InfluenceVector& iv, const Graph& g, int radius, double level, double theta);

double normal_quantile(double p);

}  // namespace keceni
