#include "keceni/dissimilarity.hpp"

#include <cmath>
#include <limits>

#include "keceni/error.hpp"

namespace keceni {
namespace {

double centered_average(const std::vector<int>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (int t : v) s += t - 0.5;
  return s / static_cast<double>(v.size());
}

double treated_share(const std::vector<int>& v) {
  double s = 0.0;
  for (int t : v) s += t;
  return s / static_cast<double>(v.size());
}

LocalTreatment local_from(const Dataset& ds, NodeId i, std::span<const int> override_t) {
  if (override_t.empty()) return observed_local_treatment(ds, i);
  if (override_t.size() != ds.graph.degree(i) + 1) throw InputError("treatment override must cover N_i");
  LocalTreatment lt;
  lt.self = override_t[0];
  lt.neighbors.assign(override_t.begin() + 1, override_t.end());
  return lt;
}

}  // namespace

double summary_l1(const LocalTreatment& a, const LocalTreatment& b) {
  return std::abs(a.self - b.self) + std::abs(centered_average(a.neighbors) - centered_average(b.neighbors));
}

double wasserstein_treatment(const LocalTreatment& a, const LocalTreatment& b, EmptyPolicy policy) {
  const double ego = std::abs(a.self - b.self);
  const bool ea = a.neighbors.empty();
  const bool eb = b.neighbors.empty();
  if (ea && eb) return ego;
  if (ea || eb) {
    if (policy == EmptyPolicy::exclude) return std::numeric_limits<double>::infinity();
    return ego + 0.5;  // every 0/1 value sits 0.5 from the midpoint
  }
  // On {0,1} the quantile functions are step functions, so W1 is the gap in treated shares.
  return ego + std::abs(treated_share(a.neighbors) - treated_share(b.neighbors));
}

DissimilarityMetric DissimilarityMetric::parse(std::string_view name) {
  DissimilarityMetric m;
  if (name == "summary-l1") m.kind = DissimilarityKind::summary_l1;
  else if (name == "wasserstein-treatment") m.kind = DissimilarityKind::wasserstein_treatment;
  else if (name == "wasserstein-treatment-exclude") {
    m.kind = DissimilarityKind::wasserstein_treatment;
    m.empty_policy = EmptyPolicy::exclude;
  } else
    throw InputError("unknown metric '" + std::string(name) + "' (expected summary-l1|wasserstein-treatment)");
  return m;
}

std::string DissimilarityMetric::name() const {
  switch (kind) {
    case DissimilarityKind::summary_l1: return "summary-l1";
    case DissimilarityKind::wasserstein_treatment:
      return empty_policy == EmptyPolicy::exclude ? "wasserstein-treatment-exclude" : "wasserstein-treatment";
    case DissimilarityKind::custom: return "custom";
  }
  return "custom";
}

double DissimilarityMetric::operator()(const LocalTreatment& observed, const LocalTreatment& target) const {
  switch (kind) {
    case DissimilarityKind::summary_l1: return summary_l1(observed, target);
    case DissimilarityKind::wasserstein_treatment: return wasserstein_treatment(observed, target, empty_policy);
    case DissimilarityKind::custom: return custom(observed, target);
  }
  return 0.0;
}

double summary_l1_delta(const Dataset& ds, NodeId i, const TreatmentScenario& sc, std::span<const int> override_t) {
  return summary_l1(local_from(ds, i, override_t), sc.local());
}

double wasserstein_treatment_delta(const Dataset& ds, NodeId i, const TreatmentScenario& sc, std::span<const int> override_t,
                                   EmptyPolicy policy) {
  return wasserstein_treatment(local_from(ds, i, override_t), sc.local(), policy);
}

std::vector<LocalTreatment> observed_local_treatments(const Dataset& ds) {
  std::vector<LocalTreatment> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = observed_local_treatment(ds, static_cast<NodeId>(i));
  return out;
}

std::vector<double> dissimilarities(std::span<const LocalTreatment> observed, const DissimilarityMetric& metric,
                                    const LocalTreatment& target) {
  std::vector<double> d(observed.size());
  for (std::size_t j = 0; j < observed.size(); ++j) d[j] = metric(observed[j], target);
  return d;
}

}  // namespace keceni
