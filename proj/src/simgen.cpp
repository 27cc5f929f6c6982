#include "keceni/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "keceni/error.hpp"
#include "keceni/features.hpp"
#include "keceni/random.hpp"

namespace keceni {
namespace {

double sup_norm(const Eigen::MatrixXd& z, Eigen::Index i) { return std::max(std::abs(z(i, 0)), std::abs(z(i, 1))); }

double avg_over(std::span<const NodeId> nodes, NodeId skip, const std::function<double(NodeId)>& v) {
  double s = 0.0;
  std::size_t k = 0;
  for (NodeId j : nodes) {
    if (j == skip) continue;
    s += v(j);
    ++k;
  }
  return k ? s / static_cast<double>(k) : 0.0;
}

}  // namespace

double edge_probability(double dist_inf, double rho, double beta) {
  return std::min(1.0, rho * std::exp(-std::exp(beta * dist_inf)));
}

LatentNetwork gen_latent_network(std::size_t n, double rho, double beta, std::uint64_t seed, double half_width) {
  if (n == 0) throw InputError("network needs at least one node");
  if (!(rho > 0.0)) throw InputError("rho must be positive");
  LatentNetwork net;
  net.z.resize(static_cast<Eigen::Index>(n), 2);
  auto zr = make_rng(seed, Stream::network, 0);
  std::uniform_real_distribution<double> unif(-half_width, half_width);
  for (Eigen::Index i = 0; i < net.z.rows(); ++i) {
    net.z(i, 0) = unif(zr);
    net.z(i, 1) = unif(zr);
  }
  std::vector<Edge> edges;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    // One stream per row keeps the draw for (i, j) independent of n.
    auto er = make_rng(seed, Stream::network, 1 + i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      const double d = std::max(std::abs(net.z(a, 0) - net.z(b, 0)), std::abs(net.z(a, 1) - net.z(b, 1)));
      const double u = coin(er);
      if (u < edge_probability(d, rho, beta)) edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    }
  }
  net.graph = Graph::build(n, edges);
  return net;
}

LatentNetwork nested_subnetwork(const LatentNetwork& pre, std::size_t n) {
  const auto total = static_cast<std::size_t>(pre.z.rows());
  if (n == 0 || n > total) throw InputError("subnetwork size must lie in [1, " + std::to_string(total) + "]");
  std::vector<NodeId> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return sup_norm(pre.z, a) < sup_norm(pre.z, b); });
  order.resize(n);
  LatentNetwork sub;
  sub.graph = pre.graph.induced(order);
  sub.z.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t k = 0; k < n; ++k) sub.z.row(static_cast<Eigen::Index>(k)) = pre.z.row(order[k]);
  return sub;
}

NodeId select_target(const Eigen::MatrixXd& z) {
  if (z.rows() == 0) throw InputError("no nodes to select a target from");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < z.rows(); ++i)
    if (sup_norm(z, i) < sup_norm(z, best)) best = i;
  return static_cast<NodeId>(best);
}

Dataset gen_nodewise_data(const Graph& g, const NodewiseCoefficients& c, std::uint64_t seed) {
  const std::size_t n = g.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 3);
  auto xr = make_rng(seed, Stream::covariates);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index k = 0; k < 3; ++k) x(i, k) = gauss(xr);

  std::vector<int> t(n);
  auto tr = make_rng(seed, Stream::treatment);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<NodeId>(i);
    double eta = c.pi0;
    for (int k = 0; k < 3; ++k) {
      eta += c.pi1[k] * x(ii, k);
      eta += c.pi2[k] * avg_over(g.neighbors(ii), ii, [&](NodeId j) { return x(j, k); });
    }
    t[i] = coin(tr) < expit(eta) ? 1 : 0;
  }

  std::vector<double> y(n);
  auto yr = make_rng(seed, Stream::outcome);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<NodeId>(i);
    const auto two_hop = k_hop(g, ii, 2);
    double mean = c.mu0 + c.mu1 * (t[i] - 0.5) +
                  c.mu2 * avg_over(g.neighbors(ii), ii, [&](NodeId j) { return t[j] - 0.5; });
    for (int k = 0; k < 3; ++k) {
      mean += c.mu3[k] * x(ii, k);
      mean += c.mu4[k] * avg_over(two_hop, ii, [&](NodeId j) { return x(j, k); });
    }
    y[i] = mean + gauss(yr);
  }
  return make_dataset(g, std::move(y), std::move(t), std::move(x));
}

double true_theta_nodewise(const Graph& g, const NodewiseCoefficients& c, const TreatmentScenario& sc) {
  validate_scenario(g, sc);
  const auto lt = sc.local();
  double avg = 0.0;
  for (int v : lt.neighbors) avg += v - 0.5;
  if (!lt.neighbors.empty()) avg /= static_cast<double>(lt.neighbors.size());
  return c.mu0 + c.mu1 * (lt.self - 0.5) + c.mu2 * avg;
}

Dataset gen_ate_data(const Graph& g, const AteCoefficients& c, std::uint64_t seed) {
  const std::size_t n = g.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 2);
  auto xr = make_rng(seed, Stream::covariates);
  std::bernoulli_distribution half(0.5);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index k = 0; k < 2; ++k) x(i, k) = half(xr) ? 1.0 : 0.0;

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = (x(static_cast<Eigen::Index>(i), 0) - 0.5) * (x(static_cast<Eigen::Index>(i), 1) - 0.5);
  std::vector<double> avg_w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<NodeId>(i);
    avg_w[i] = avg_over(g.neighbors(ii), ii, [&](NodeId j) { return w[j]; });
  }

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<int> t(n);
  auto tr = make_rng(seed, Stream::treatment);
  for (std::size_t i = 0; i < n; ++i) t[i] = coin(tr) < expit(c.beta_pi * avg_w[i]) ? 1 : 0;
  std::vector<double> y(n);
  auto yr = make_rng(seed, Stream::outcome);
  for (std::size_t i = 0; i < n; ++i) y[i] = coin(yr) < expit(c.mu1 * (t[i] - 0.5) + c.mu2 * avg_w[i]) ? 1.0 : 0.0;
  return make_dataset(g, std::move(y), std::move(t), std::move(x));
}

double true_theta_ate(const Graph& g, const AteCoefficients& c, const TreatmentScenario& sc) {
  validate_scenario(g, sc);
  const int self = sc.value(sc.target);
  const std::size_t k = g.degree(sc.target);
  const double base = c.mu1 * (self - 0.5);
  if (k == 0) return expit(base);
  // Σ_b C(k,b) 2^{-k} expit(base + μ2 · (2b - k)/(4k)), in log space for large k.
  double acc = 0.0;
  for (std::size_t b = 0; b <= k; ++b) {
    const double logw = std::lgamma(k + 1.0) - std::lgamma(b + 1.0) - std::lgamma(k - b + 1.0) - k * std::log(2.0);
    const double avg = 0.25 * (2.0 * static_cast<double>(b) - static_cast<double>(k)) / static_cast<double>(k);
    acc += std::exp(logw) * expit(base + c.mu2 * avg);
  }
  return acc;
}

double average_theta_ate(const Graph& g, const AteCoefficients& c, int t) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    TreatmentScenario sc;
    sc.target = static_cast<NodeId>(i);
    for (NodeId v : closed_neighborhood(g, sc.target)) sc.assignment.emplace_back(v, t);
    s += true_theta_ate(g, c, sc);
  }
  return s / static_cast<double>(g.size());
}

nlohmann::json SimConfig::to_json() const {
  nlohmann::json j{{"experiment", experiment}, {"n", n},       {"rho", rho},           {"beta", beta},
                   {"half_width", half_width}, {"reps", reps}, {"seed", seed},         {"alpha_pi", alpha_pi},
                   {"alpha_mu", alpha_mu}};
  if (experiment == "ate") {
    j["coefficients"] = {{"beta_pi", ate.beta_pi}, {"beta_mu1", ate.mu1}, {"beta_mu2", ate.mu2}};
  } else {
    const auto& c = nodewise;
    j["coefficients"] = {{"beta_pi0", c.pi0}, {"beta_pi1", c.pi1}, {"beta_pi2", c.pi2}, {"beta_mu0", c.mu0},
                         {"beta_mu1", c.mu1}, {"beta_mu2", c.mu2}, {"beta_mu3", c.mu3}, {"beta_mu4", c.mu4}};
  }
  return j;
}

std::uint64_t replication_seed(std::uint64_t seed, std::size_t rep) { return derive_seed(seed, Stream::replication, rep); }

}  // namespace keceni
