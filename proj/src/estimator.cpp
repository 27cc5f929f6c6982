#include "keceni/estimator.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "keceni/error.hpp"
#include "keceni/parallel.hpp"

namespace keceni {

std::size_t profile_count(std::size_t support_size, std::size_t positions, std::size_t limit) {
  std::size_t total = 1;
  for (std::size_t k = 0; k < positions; ++k) {
    if (support_size > 1 && total > limit / support_size) return limit + 1;
    total *= support_size;
  }
  return total;
}

std::pair<std::size_t, bool> integrate_profiles(const CovariateDistribution& cd, std::size_t positions, const McOptions& mc,
                                                Rng& rng,
                                                const std::function<void(std::span<const double* const>, double)>& visit) {
  const std::size_t s = cd.support_size();
  std::vector<const double*> rows(positions);
  const std::size_t count = profile_count(s, positions, mc.exact_limit);
  if (count <= mc.exact_limit) {
    std::vector<std::size_t> digit(positions, 0);
    for (std::size_t e = 0; e < count; ++e) {
      double w = 1.0;
      for (std::size_t k = 0; k < positions; ++k) {
        rows[k] = cd.row(digit[k]);
        w *= cd.weight(digit[k]);
      }
      visit(rows, w);
      for (std::size_t k = 0; k < positions; ++k) {
        if (++digit[k] < s) break;
        digit[k] = 0;
      }
    }
    return {count, true};
  }
  if (mc.draws == 0) throw InputError("Monte Carlo draw count must be at least 1");
  const double w = 1.0 / static_cast<double>(mc.draws);
  for (std::size_t d = 0; d < mc.draws; ++d) {
    for (std::size_t k = 0; k < positions; ++k) rows[k] = cd.row(cd.sample(rng));
    visit(rows, w);
  }
  return {mc.draws, false};
}

PseudoOutcome pseudo_outcome(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceBundle& nb, NodeId i,
                             const McOptions& mc, std::uint64_t seed) {
  const auto& s = index.at(i);
  const auto hood_t = index.hood_treatments(ds, i);
  PseudoOutcome po;
  po.node = i;
  po.y = ds.y[i];

  LocalFrame frame(s);
  frame.bind_observed(index);
  po.mu = nb.outcome->predict(frame.outcome_context(hood_t));
  po.pi = joint_propensity(*nb.propensity, frame, hood_t);

  auto rng = make_rng(seed, Stream::pseudo_outcome, static_cast<std::uint64_t>(i));
  double m = 0.0, varpi = 0.0;
  const auto [evals, exact] = integrate_profiles(*nb.covariates, s.members.size(), mc, rng,
                                                 [&](std::span<const double* const> rows, double w) {
                                                   frame.bind(rows);
                                                   m += w * nb.outcome->predict(frame.outcome_context(hood_t));
                                                   varpi += w * joint_propensity(*nb.propensity, frame, hood_t);
                                                 });
  po.m = m;
  po.varpi = varpi;
  po.mc_draws = evals;
  po.exact = exact;
  po.xi = ds.has_outcome(i) ? (po.y - po.mu) / po.pi * po.varpi + po.m : std::numeric_limits<double>::quiet_NaN();
  return po;
}

std::vector<PseudoOutcome> pseudo_outcomes(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceBundle& nb,
                                           const McOptions& mc, std::uint64_t seed, int threads) {
  std::vector<PseudoOutcome> out(ds.size());
  parallel_for(ds.size(), threads,
               [&](std::size_t i) { out[i] = pseudo_outcome(ds, index, nb, static_cast<NodeId>(i), mc, seed); });
  return out;
}

Estimate kernel_smooth(std::span<const double> delta, std::span<const PseudoOutcome> po, const Kernel& kernel,
                       std::span<const NodeId> exclude) {
  const std::size_t n = po.size();
  if (delta.size() != n) throw InputError("dissimilarities and pseudo-outcomes differ in length");
  if (!(kernel.bandwidth > 0.0)) throw InputError("bandwidth must be positive");
  std::vector<char> excluded(n, 0);
  for (NodeId j : exclude)
    if (j >= 0 && static_cast<std::size_t>(j) < n) excluded[j] = 1;

  Estimate est;
  est.lambda = kernel.bandwidth;
  est.delta.assign(delta.begin(), delta.end());
  est.weight.assign(n, 0.0);
  est.xi.resize(n);
  std::vector<double> wx(n, 0.0), w2(n, 0.0);
  double min_delta = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    est.xi[j] = po[j].xi;
    if (excluded[j] || !po[j].valid() || !std::isfinite(delta[j])) continue;
    min_delta = std::min(min_delta, delta[j]);
    const double w = kernel(delta[j]);
    est.weight[j] = w;
    wx[j] = w * po[j].xi;
    w2[j] = w * w;
  }
  est.d_hat = pairwise_sum(est.weight);
  if (!(est.d_hat > 0.0)) {
    std::ostringstream msg;
    msg << "no comparable units within bandwidth lambda = " << kernel.bandwidth << " (smallest eligible delta = " << min_delta
        << "); widen the bandwidth";
    throw EmptyKernelError(msg.str(), min_delta);
  }
  est.theta = pairwise_sum(wx) / est.d_hat;
  est.n_effective = est.d_hat * est.d_hat / pairwise_sum(w2);
  return est;
}

Estimate keceni_estimate(const Dataset& ds, std::span<const PseudoOutcome> po, const DissimilarityMetric& metric,
                         const Kernel& kernel, const TreatmentScenario& sc, std::span<const NodeId> exclude) {
  validate_scenario(ds.graph, sc);
  const auto observed = observed_local_treatments(ds);
  const auto delta = dissimilarities(observed, metric, sc.local());
  auto est = kernel_smooth(delta, po, kernel, exclude);
  est.scenario = sc;
  est.metric = metric.name();
  return est;
}

Estimate keceni_estimate(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceBundle& nb,
                         const DissimilarityMetric& metric, const Kernel& kernel, const TreatmentScenario& sc,
                         std::span<const NodeId> exclude, const McOptions& mc, std::uint64_t seed, int threads) {
  const auto po = pseudo_outcomes(ds, index, nb, mc, seed, threads);
  auto est = keceni_estimate(ds, po, metric, kernel, sc, exclude);
  est.seed = seed;
  return est;
}

nlohmann::json Estimate::to_json(const Dataset& ds, bool per_node) const {
  nlohmann::json j;
  j["theta"] = theta;
  j["d_hat"] = d_hat;
  j["lambda"] = lambda;
  j["n_effective"] = n_effective;
  j["metric"] = metric;
  j["seed"] = seed;
  j["scenario"] = nlohmann::json::parse(scenario_to_json(scenario, ds));
  if (per_node) {
    auto arr = nlohmann::json::array();
    for (std::size_t k = 0; k < weight.size(); ++k) {
      if (weight[k] <= 0.0) continue;
      arr.push_back({{"id", ds.ids[k]}, {"delta", delta[k]}, {"weight", weight[k]}, {"xi", xi[k]}});
    }
    j["per_node"] = std::move(arr);
  }
  return j;
}

double g_computation(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceBundle& nb, const TreatmentScenario& sc,
                     const McOptions& mc, std::uint64_t seed) {
  validate_scenario(ds.graph, sc);
  const auto& s = index.at(sc.target);
  std::vector<int> hood_t;
  for (NodeId v : s.hood) hood_t.push_back(sc.value(v));
  LocalFrame frame(s);
  auto rng = make_rng(seed, Stream::g_computation, static_cast<std::uint64_t>(sc.target));
  double acc = 0.0;
  integrate_profiles(*nb.covariates, s.members.size(), mc, rng, [&](std::span<const double* const> rows, double w) {
    frame.bind(rows);
    acc += w * nb.outcome->predict(frame.outcome_context(hood_t));
  });
  return acc;
}

SutvaAipw aipw_sutva(const Dataset& ds, const std::string& covariate_map, double epsilon) {
  const auto fm = FeatureMap::from_name(covariate_map, ds.covariate_width());
  if (fm.target() != FeatureTarget::node) throw InputError("SUTVA AIPW needs a node-level covariate map");
  const std::size_t n = ds.size();
  const auto w = static_cast<Eigen::Index>(fm.width());
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), w);
  std::vector<double> buf(fm.width());
  std::vector<double> row(ds.covariate_width());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    NodeContext ctx;
    ctx.x_self = row.data();
    fm.node(ctx, buf);
    for (Eigen::Index c = 0; c < w; ++c) z(static_cast<Eigen::Index>(i), c) = buf[static_cast<std::size_t>(c)];
  }

  Eigen::VectorXd t(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) t(static_cast<Eigen::Index>(i)) = ds.t[i];
  const auto ps = fit_logistic_regression(z, t);
  const Eigen::VectorXd e = (z * ps.beta).unaryExpr([&](double v) { return std::clamp(expit(v), epsilon, 1.0 - epsilon); });

  Eigen::VectorXd mu[2];
  for (int arm = 0; arm < 2; ++arm) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < n; ++i)
      if (ds.t[i] == arm && ds.has_outcome(static_cast<NodeId>(i))) rows.push_back(static_cast<Eigen::Index>(i));
    Eigen::MatrixXd za(static_cast<Eigen::Index>(rows.size()), w);
    Eigen::VectorXd ya(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      za.row(static_cast<Eigen::Index>(r)) = z.row(rows[r]);
      ya(static_cast<Eigen::Index>(r)) = ds.y[static_cast<std::size_t>(rows[r])];
    }
    mu[arm] = z * fit_least_squares(za, ya, fm.column_names()).beta;
  }

  std::vector<double> s1, s0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ds.has_outcome(static_cast<NodeId>(i))) continue;
    const auto k = static_cast<Eigen::Index>(i);
    const double y = ds.y[i];
    s1.push_back((ds.t[i] == 1 ? (y - mu[1](k)) / e(k) : 0.0) + mu[1](k));
    s0.push_back((ds.t[i] == 0 ? (y - mu[0](k)) / (1.0 - e(k)) : 0.0) + mu[0](k));
  }
  SutvaAipw out;
  out.theta1 = pairwise_sum(s1) / static_cast<double>(s1.size());
  out.theta0 = pairwise_sum(s0) / static_cast<double>(s0.size());
  out.difference = out.theta1 - out.theta0;
  return out;
}

TreatmentScenario make_scenario(const Graph& g, NodeId target, int self, const std::function<int(NodeId)>& neighbor_value) {
  TreatmentScenario sc;
  sc.target = target;
  for (NodeId v : closed_neighborhood(g, target)) sc.assignment.emplace_back(v, v == target ? self : neighbor_value(v));
  validate_scenario(g, sc);
  return sc;
}

TreatmentScenario all_treated(const Graph& g, NodeId target) {
  return make_scenario(g, target, 1, [](NodeId) { return 1; });
}

TreatmentScenario none_treated(const Graph& g, NodeId target) {
  return make_scenario(g, target, 0, [](NodeId) { return 0; });
}

std::pair<TreatmentScenario, TreatmentScenario> de_pair(const Dataset& ds, NodeId target) {
  auto observed = [&](NodeId v) { return ds.t[v]; };
  return {make_scenario(ds.graph, target, 1, observed), make_scenario(ds.graph, target, 0, observed)};
}

std::pair<TreatmentScenario, TreatmentScenario> spe_pair(const Graph& g, NodeId target, int t_self) {
  return {make_scenario(g, target, t_self, [](NodeId) { return 1; }),
          make_scenario(g, target, t_self, [](NodeId) { return 0; })};
}

std::pair<TreatmentScenario, TreatmentScenario> half_treated_pair(const Graph& g, NodeId target) {
  const auto nbrs = g.neighbors(target);
  const std::size_t half = nbrs.size() / 2;
  auto value = [&](NodeId v) {
    const auto pos = static_cast<std::size_t>(std::find(nbrs.begin(), nbrs.end(), v) - nbrs.begin());
    return pos < half ? 1 : 0;
  };
  return {make_scenario(g, target, 0, value), make_scenario(g, target, 1, value)};
}

std::vector<GroupSummary> aggregate_over_nodes(std::span<const double> values, std::span<const std::size_t> degrees,
                                               std::span<const std::size_t> bin_edges) {
  if (values.size() != degrees.size()) throw InputError("aggregate: values and degrees differ in length");
  std::vector<std::size_t> edges(bin_edges.begin(), bin_edges.end());
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  if (edges.empty()) edges.push_back(0);

  std::vector<GroupSummary> out(edges.size());
  std::vector<std::vector<double>> members(edges.size());
  for (std::size_t b = 0; b < edges.size(); ++b) {
    const bool last = b + 1 == edges.size();
    if (bin_edges.empty()) out[b].label = "all";
    else if (last) out[b].label = std::to_string(edges[b]) + "+";
    else if (edges[b + 1] == edges[b] + 1) out[b].label = std::to_string(edges[b]);
    else out[b].label = std::to_string(edges[b]) + "-" + std::to_string(edges[b + 1] - 1);
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (degrees[k] < edges.front()) continue;
    const auto b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), degrees[k]) - edges.begin()) - 1;
    members[b].push_back(values[k]);
  }
  for (std::size_t b = 0; b < edges.size(); ++b) {
    out[b].count = members[b].size();
    out[b].mean = members[b].empty() ? std::numeric_limits<double>::quiet_NaN()
                                     : pairwise_sum(members[b]) / static_cast<double>(members[b].size());
  }
  return out;
}

}  // namespace keceni
