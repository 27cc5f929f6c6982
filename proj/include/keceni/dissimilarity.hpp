#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "keceni/dataset.hpp"
#include "keceni/scenario.hpp"

namespace keceni {

enum class DissimilarityKind { summary_l1, wasserstein_treatment, custom };

/// What the Wasserstein term does when exactly one neighbor set is empty.
enum class EmptyPolicy { midpoint, exclude };

/// Δ between an observed local configuration and the target's.
struct DissimilarityMetric {
  using Function = std::function<double(const LocalTreatment& observed, const LocalTreatment& target)>;

  DissimilarityKind kind = DissimilarityKind::summary_l1;
  EmptyPolicy empty_policy = EmptyPolicy::midpoint;
  Function custom;

  static DissimilarityMetric parse(std::string_view name);
  std::string name() const;

  double operator()(const LocalTreatment& observed, const LocalTreatment& target) const;
};

/// |t_i - t*| + |Avg(t_nbrs - .5) - Avg(t*_nbrs - .5)|, Avg(∅) = 0.
double summary_l1(const LocalTreatment& a, const LocalTreatment& b);

/// |t_i - t*| + W1 between the neighbor treatment multisets. A lone empty side
/// is a point mass at 0.5, or +∞ under EmptyPolicy::exclude.
double wasserstein_treatment(const LocalTreatment& a, const LocalTreatment& b, EmptyPolicy policy = EmptyPolicy::midpoint);

/// Δ_i against the scenario; `override_t` (hood order: [i, neighbors...])
/// replaces the observed T_{N_i} when given.
double summary_l1_delta(const Dataset& ds, NodeId i, const TreatmentScenario& sc, std::span<const int> override_t = {});
double wasserstein_treatment_delta(const Dataset& ds, NodeId i, const TreatmentScenario& sc, std::span<const int> override_t = {},
                                   EmptyPolicy policy = EmptyPolicy::midpoint);

/// Observed (T_i, T_{N_i \ i}) for every node.
std::vector<LocalTreatment> observed_local_treatments(const Dataset& ds);

/// Δ_j for every j against one target configuration.
std::vector<double> dissimilarities(std::span<const LocalTreatment> observed, const DissimilarityMetric& metric,
                                    const LocalTreatment& target);

}  // namespace keceni
