#include "keceni/variance.hpp"

#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "keceni/error.hpp"
#include "keceni/parallel.hpp"

namespace keceni {
namespace {

const Linearization& require_linearization(const Linearization* lin, const char* what) {
  if (lin == nullptr) throw InputError(std::string(what) + " has no linearization; full variance needs fitted parametric nuisances");
  return *lin;
}

double quadratic(std::span<const double> grad, const Linearization& lin, NodeId i) {
  const Eigen::Map<const Eigen::VectorXd> g(grad.data(), static_cast<Eigen::Index>(grad.size()));
  return g.dot(lin.bread_inverse * lin.scores.row(i).transpose());
}

}  // namespace

XiPartials xi_partials(const PseudoOutcome& po) {
  XiPartials d;
  const double r = po.y - po.mu;
  d.d_mu = -po.varpi / po.pi;
  d.d_m = 1.0;
  d.d_pi = -r * po.varpi / (po.pi * po.pi);
  d.d_varpi = r / po.pi;
  return d;
}

double h_mu(const OutcomeModel& model, NodeId i, const OutcomeContext& query) {
  const auto& lin = require_linearization(model.linearization(), "outcome model");
  std::vector<double> g(model.feature_map().width());
  model.gradient(query, g);
  return quadratic(g, lin, i);
}

std::vector<double> joint_propensity_gradient(const PropensityModel& model, const LocalFrame& frame, std::span<const int> hood_t) {
  const std::size_t w = model.feature_map().width();
  std::vector<double> total(w, 0.0), g(w);
  double joint = 1.0;
  for (std::size_t k = 0; k < hood_t.size(); ++k) {
    const auto ctx = frame.node_context(k);
    joint *= model.probability(hood_t[k], ctx);
    model.log_gradient(hood_t[k], ctx, g);
    for (std::size_t c = 0; c < w; ++c) total[c] += g[c];
  }
  for (auto& v : total) v *= joint;
  return total;
}

double h_pi(const PropensityModel& model, NodeId i, const LocalFrame& frame, std::span<const int> hood_t) {
  const auto& lin = require_linearization(model.linearization(), "propensity model");
  return quadratic(joint_propensity_gradient(model, frame, hood_t), lin, i);
}

std::vector<double> hajek_projection(const CovariateDistribution& cd, std::size_t positions, std::size_t n,
                                     const std::function<double(std::span<const double* const>)>& f, std::size_t draws,
                                     std::uint64_t seed) {
  const std::size_t S = cd.support_size();
  std::vector<double> out(S, 0.0);
  if (positions == 0 || draws == 0) return out;
  auto rng = make_rng(seed, Stream::hajek, 0);
  std::vector<std::vector<const double*>> completions(draws, std::vector<const double*>(positions));
  for (auto& c : completions)
    for (auto& r : c) r = cd.row(cd.sample(rng));

  std::vector<double> cond(S);
  const double inv_draws = 1.0 / static_cast<double>(draws);
  for (std::size_t p = 0; p < positions; ++p) {
    std::fill(cond.begin(), cond.end(), 0.0);
    for (auto& c : completions) {
      const double* keep = c[p];
      for (std::size_t r = 0; r < S; ++r) {
        c[p] = cd.row(r);
        cond[r] += f(c) * inv_draws;
      }
      c[p] = keep;
    }
    double mean = 0.0;
    for (std::size_t r = 0; r < S; ++r) mean += cd.weight(r) * cond[r];
    for (std::size_t r = 0; r < S; ++r) out[r] += (cond[r] - mean) / static_cast<double>(n);
  }
  return out;
}

double h_cov(const CovariateDistribution& cd, std::size_t positions, std::size_t n,
             const std::function<double(std::span<const double* const>)>& f, NodeId i, std::size_t draws, std::uint64_t seed) {
  return hajek_projection(cd, positions, n, f, draws, seed)[cd.support_index_of(static_cast<std::size_t>(i))];
}

VarianceMode parse_variance_mode(std::string_view name) {
  if (name == "simple") return VarianceMode::simple;
  if (name == "full") return VarianceMode::full;
  throw InputError("unknown variance mode '" + std::string(name) + "' (expected none|simple|full)");
}

std::string to_string(VarianceMode mode) { return mode == VarianceMode::full ? "full" : "simple"; }

InfluenceVector influence_vector(const Dataset& ds, const NeighborhoodIndex& index, const NuisanceBundle& nb,
                                 std::span<const PseudoOutcome> po, const Estimate& est, const VarianceOptions& opts,
                                 std::uint64_t seed, int threads) {
  const std::size_t n = ds.size();
  if (po.size() != n || est.weight.size() != n) throw InputError("influence vector: inputs do not match the dataset");
  InfluenceVector iv;
  iv.mode = opts.mode;
  iv.w.assign(n, 0.0);
  std::vector<double> direct(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (est.weight[i] > 0.0) direct[i] = est.weight[i] * (po[i].xi - est.theta);
  if (opts.mode == VarianceMode::simple) {
    for (std::size_t i = 0; i < n; ++i) iv.w[i] = direct[i] / est.d_hat;
    return iv;
  }

  if (!nb.outcome->is_parametric() || !nb.propensity->is_parametric())
    throw InputError("full variance mode needs parametric outcome and propensity models; use --variance simple");
  const auto& lin_mu = require_linearization(nb.outcome->linearization(), "outcome model");
  const auto& lin_pi = require_linearization(nb.propensity->linearization(), "propensity model");
  const auto& cd = *nb.covariates;
  if (!cd.has_data_mapping()) throw InputError("full variance mode needs the empirical covariate law");

  std::vector<NodeId> active;
  for (std::size_t j = 0; j < n; ++j)
    if (est.weight[j] > 0.0) active.push_back(static_cast<NodeId>(j));
  const std::size_t pm = nb.outcome->feature_map().width();
  const std::size_t pp = nb.propensity->feature_map().width();
  const std::size_t S = cd.support_size();

  std::vector<std::vector<double>> g_mu(active.size()), g_pi(active.size()), hp(active.size());
  parallel_for(active.size(), threads, [&](std::size_t a) {
    const NodeId j = active[a];
    const double kappa = est.weight[j];
    const auto d = xi_partials(po[j]);
    const auto& s = index.at(j);
    const auto hood_t = index.hood_treatments(ds, j);
    LocalFrame frame(s);
    frame.bind_observed(index);

    std::vector<double> gm(pm), tmp(pm);
    nb.outcome->gradient(frame.outcome_context(hood_t), gm);
    auto gp = joint_propensity_gradient(*nb.propensity, frame, hood_t);

    std::vector<double> egm(pm, 0.0), egp(pp, 0.0);
    auto rng = make_rng(seed, Stream::hajek, n + static_cast<std::uint64_t>(j));
    LocalFrame draw(s);
    integrate_profiles(cd, s.members.size(), opts.mc, rng, [&](std::span<const double* const> rows, double w) {
      draw.bind(rows);
      nb.outcome->gradient(draw.outcome_context(hood_t), tmp);
      for (std::size_t c = 0; c < pm; ++c) egm[c] += w * tmp[c];
      const auto g = joint_propensity_gradient(*nb.propensity, draw, hood_t);
      for (std::size_t c = 0; c < pp; ++c) egp[c] += w * g[c];
    });
    g_mu[a].resize(pm);
    g_pi[a].resize(pp);
    for (std::size_t c = 0; c < pm; ++c) g_mu[a][c] = kappa * (d.d_mu * gm[c] + d.d_m * egm[c]);
    for (std::size_t c = 0; c < pp; ++c) g_pi[a][c] = kappa * (d.d_pi * gp[c] + d.d_varpi * egp[c]);

    LocalFrame fr(s);
    auto f = [&](std::span<const double* const> rows) {
      fr.bind(rows);
      return d.d_m * nb.outcome->predict(fr.outcome_context(hood_t)) +
             d.d_varpi * joint_propensity(*nb.propensity, fr, hood_t);
    };
    hp[a] = hajek_projection(cd, s.members.size(), n, f, opts.hajek_draws,
                             derive_seed(seed, Stream::hajek, static_cast<std::uint64_t>(j)));
    for (auto& v : hp[a]) v *= kappa;
  });

  Eigen::VectorXd G_mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pm));
  Eigen::VectorXd G_pi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pp));
  std::vector<double> HP(S, 0.0);
  for (std::size_t a = 0; a < active.size(); ++a) {
    for (std::size_t c = 0; c < pm; ++c) G_mu(static_cast<Eigen::Index>(c)) += g_mu[a][c];
    for (std::size_t c = 0; c < pp; ++c) G_pi(static_cast<Eigen::Index>(c)) += g_pi[a][c];
    for (std::size_t r = 0; r < S; ++r) HP[r] += hp[a][r];
  }
  const Eigen::VectorXd u_mu = lin_mu.bread_inverse * G_mu;
  const Eigen::VectorXd u_pi = lin_pi.bread_inverse * G_pi;

  double mass_direct = 0.0, mass_total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double prop = lin_mu.scores.row(k).dot(u_mu) + lin_pi.scores.row(k).dot(u_pi) + HP[cd.support_index_of(i)];
    iv.w[i] = (direct[i] + prop) / est.d_hat;
    mass_direct += std::abs(direct[i]);
    mass_total += std::abs(direct[i]) + std::abs(prop);
  }
  iv.nuisance_share = mass_total > 0.0 ? 1.0 - mass_direct / mass_total : 0.0;
  return iv;
}

InfluenceVector difference(const InfluenceVector& a, const InfluenceVector& b) {
  if (a.w.size() != b.w.size()) throw InputError("influence vectors differ in length");
  InfluenceVector out;
  out.mode = a.mode;
  out.w.resize(a.w.size());
  for (std::size_t i = 0; i < a.w.size(); ++i) out.w[i] = a.w[i] - b.w[i];
  out.nuisance_share = 0.5 * (a.nuisance_share + b.nuisance_share);
  return out;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("normal quantile needs p in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double VarianceReport::sigma() const { return std::sqrt(sigma2); }

nlohmann::json VarianceReport::to_json() const {
  return {{"sigma2", sigma2}, {"ci", {ci_lo, ci_hi}}, {"level", level}, {"mode", to_string(mode)},
          {"radius", radius}, {"fallback_used", fallback_used}};
}

VarianceReport hac_variance(const InfluenceVector& iv, const Graph& g, int radius, double level, double theta) {
  if (radius < 0) throw InputError("HAC radius must be non-negative");
  if (!(level > 0.0 && level < 1.0)) throw InputError("confidence level must lie in (0, 1)");
  if (iv.w.size() != g.size()) throw InputError("influence vector does not match the graph");
  const std::size_t n = g.size();
  std::vector<double> row(n, 0.0), diag(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = iv.w[i];
    diag[i] = wi * wi;
    if (wi == 0.0) continue;
    if (radius == 0) {
      row[i] = wi * wi;
      continue;
    }
    std::vector<double> terms;
    for (const auto& [j, dist] : ball(g, static_cast<NodeId>(i), radius)) terms.push_back(wi * iv.w[j]);
    row[i] = pairwise_sum(terms);
  }
  VarianceReport rep;
  rep.level = level;
  rep.mode = iv.mode;
  rep.radius = radius;
  rep.sigma2 = pairwise_sum(row);
  if (!(rep.sigma2 > 0.0)) {
    rep.sigma2 = pairwise_sum(diag);
    rep.fallback_used = true;
  }
  const double half = normal_quantile(0.5 + level / 2.0) * std::sqrt(rep.sigma2);
  rep.ci_lo = theta - half;
  rep.ci_hi = theta + half;
  return rep;
}

}  // namespace keceni
