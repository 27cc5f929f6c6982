#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "keceni/dissimilarity.hpp"
#include "keceni/kernel.hpp"
#include "keceni/local.hpp"
#include "keceni/models.hpp"
#include "keceni/scenario.hpp"

namespace keceni {

struct McOptions {
  std::size_t draws = 200;
  std::size_t exact_limit = 4096;  // enumerate the product law when it has at most this many profiles
};

/// Number of covariate profiles of the product law over `positions` nodes, or
/// limit+1 if it exceeds `limit`.
std::size_t profile_count(std::size_t support_size, std::size_t positions, std::size_t limit);

/// Integrates over covariate profiles on `positions` nodes: every profile of the
/// product law with its probability when there are at most mc.exact_limit of
/// them, otherwise mc.draws independent draws with weight 1/draws.
/// visit(rows, weight) gets one covariate row pointer per position.
/// Returns (evaluations, exact).
std::pair<std::size_t, bool> integrate_profiles(const CovariateDistribution& cd, std::size_t positions, const McOptions& mc,
                                                Rng& rng,
                                                const std::function<void(std::span<const double* const>, double)>& visit);

struct PseudoOutcome {
  NodeId node = 0;
  double xi = 0.0;
  double y = 0.0;
  double mu = 0.0;
  double pi = 1.0;
  double m = 0.0;
  double varpi = 1.0;
  std::size_t mc_draws = 0;
  bool exact = false;

  bool valid() const { return std::isfinite(xi); }
};

/// ξ̂ = (Y - μ̂)/π̂ · ϖ̂ + m̂ at node i. Draws come from the per-node stream
/// derive_seed(seed, pseudo_outcome, i).
PseudoOutcome pseudo_outcome(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceBundle& nb, NodeId i,
                             const McOptions& mc, std::uint64_t seed);

/// All nodes; entries for missing outcomes have xi = NaN.
std::vector<PseudoOutcome> pseudo_outcomes(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceBundle& nb,
                                           const McOptions& mc, std::uint64_t seed, int threads = 1);

struct Estimate {
  TreatmentScenario scenario;
  double theta = 0.0;
  double d_hat = 0.0;
  double lambda = 0.0;
  double n_effective = 0.0;
  std::string metric;
  std::uint64_t seed = 0;
  std::vector<double> delta;   // per node
  std::vector<double> weight;  // κ_λ(Δ_j); zero for excluded or invalid nodes
  std::vector<double> xi;

  nlohmann::json to_json(const Dataset& ds, bool per_node = true) const;
};

/// θ̂ = Σ κ_λ(Δ_j) ξ̂_j / D̂ over valid, non-excluded nodes. Throws
/// EmptyKernelError (carrying min Δ) when D̂ = 0.
Estimate kernel_smooth(std::span<const double> delta, std::span<const PseudoOutcome> po, const Kernel& kernel,
                       std::span<const NodeId> exclude = {});

Estimate keceni_estimate(const Dataset& ds, std::span<const PseudoOutcome> po, const DissimilarityMetric& metric,
                         const Kernel& kernel, const TreatmentScenario& sc, std::span<const NodeId> exclude = {});

/// Convenience overload that computes the pseudo-outcomes first.
Estimate keceni_estimate(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceBundle& nb,
                         const DissimilarityMetric& metric, const Kernel& kernel, const TreatmentScenario& sc,
                         std::span<const NodeId> exclude, const McOptions& mc, std::uint64_t seed, int threads = 1);

/// Plug-in ∫ μ̂(t*, x) dP̂ over N_{i*}^{(2)}.
double g_computation(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceBundle& nb, const TreatmentScenario& sc,
                     const McOptions& mc, std::uint64_t seed);

struct SutvaAipw {
  double theta1 = 0.0;
  double theta0 = 0.0;
  double difference = 0.0;
};

/// Classical AIPW ignoring the graph: per-arm linear outcome and a logistic
/// propensity, both on `covariate_map` (default (1, x_i)).
SutvaAipw aipw_sutva(const Dataset& ds, const std::string& covariate_map = "sutva-covariates", double epsilon = 1e-3);

// Scenario builders; every result passes validate_scenario.
TreatmentScenario all_treated(const Graph& g, NodeId target);
TreatmentScenario none_treated(const Graph& g, NodeId target);
/// Ego set to `self`; neighbors from `neighbor_value(node)`.
TreatmentScenario make_scenario(const Graph& g, NodeId target, int self, const std::function<int(NodeId)>& neighbor_value);
/// (ego treated, ego untreated), neighbors at their observed treatments.
std::pair<TreatmentScenario, TreatmentScenario> de_pair(const Dataset& ds, NodeId target);
/// (neighbors all treated, neighbors all untreated) with the ego at t_self.
std::pair<TreatmentScenario, TreatmentScenario> spe_pair(const Graph& g, NodeId target, int t_self);
/// (ego untreated, ego treated) with the first ⌊k/2⌋ of the k neighbors treated.
std::pair<TreatmentScenario, TreatmentScenario> half_treated_pair(const Graph& g, NodeId target);

struct GroupSummary {
  std::string label;
  std::size_t count = 0;
  double mean = 0.0;
};

/// Degree-bin edges as lower bounds, e.g. {0, 1, 5, 9} gives 0, 1-4, 5-8, 9+.
/// Empty edges means a single group.
std::vector<GroupSummary> aggregate_over_nodes(std::span<const double> values, std::span<const std::size_t> degrees,
                                               std::span<const std::size_t> bin_edges = {});

}  // namespace keceni
