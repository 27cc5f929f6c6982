#pragma once

// A small network with one binary covariate drawn from a known finite law,
// hand-specified outcome and propensity functions, and exact integrals by
// enumerating every covariate profile. Used as ground truth for the
// pseudo-outcome and Monte Carlo integration.

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "keceni/covariates.hpp"
#include "keceni/estimator.hpp"
#include "keceni/graph.hpp"
#include "keceni/models.hpp"

namespace keceni::testing {

struct OracleWorld {
  Graph graph;
  double p_one = 0.35;  // P(X = 1)

  static OracleWorld six_nodes() {
    std::vector<Edge> e{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 4}, {4, 5}};
    return {Graph::build(6, e)};
  }

  static OracleWorld four_nodes() {
    std::vector<Edge> e{{0, 1}, {1, 2}, {2, 3}};
    return {Graph::build(4, e)};
  }

  std::size_t size() const { return graph.size(); }

  static double avg(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double a : v) s += a;
    return s / static_cast<double>(v.size());
  }

  // Outcome regression written against raw values.
  static double mu_true(int t_self, const std::vector<int>& t_nbrs, double x_self, const std::vector<double>& x_nbrs,
                        const std::vector<double>& x_outer) {
    std::vector<double> tn(t_nbrs.begin(), t_nbrs.end());
    return 1.0 + 1.5 * t_self + 0.8 * avg(tn) + 2.0 * x_self - 1.2 * avg(x_nbrs) + 0.7 * t_self * x_self +
           0.5 * avg(x_outer);
  }
  static double mu_wrong(int t_self, const std::vector<int>&, double, const std::vector<double>&, const std::vector<double>&) {
    return 0.5 + 0.5 * t_self;
  }
  // Treated probability of a node given its own and its neighbors' covariates.
  static double pi_true(double x_self, const std::vector<double>& x_nbrs) {
    return expit(-1.0 + 2.5 * x_self - 0.8 * avg(x_nbrs));
  }
  static double pi_wrong(double x_self, const std::vector<double>&) { return expit(1.0 - 2.5 * x_self); }

  using OutcomeFn = double (*)(int, const std::vector<int>&, double, const std::vector<double>&, const std::vector<double>&);
  using PropensityFn = double (*)(double, const std::vector<double>&);

  static std::shared_ptr<OutcomeModel> outcome_model(OutcomeFn f) {
    return std::make_shared<OutcomeModel>(OutcomeModel::custom([f](const OutcomeContext& c) {
      std::vector<int> tn(c.t_neighbors.begin(), c.t_neighbors.end());
      std::vector<double> xn, xo;
      for (const double* r : c.x_neighbors) xn.push_back(r[0]);
      for (const double* r : c.x_outer) xo.push_back(r[0]);
      return f(c.t_self, tn, c.x_self[0], xn, xo);
    }));
  }

  static std::shared_ptr<PropensityModel> propensity_model(PropensityFn f) {
    return std::make_shared<PropensityModel>(PropensityModel::custom(
        [f](const NodeContext& c) {
          std::vector<double> xn;
          for (const double* r : c.x_neighbors) xn.push_back(r[0]);
          return f(c.x_self[0], xn);
        },
        0.0));
  }

  std::shared_ptr<CovariateDistribution> law() const {
    Eigen::MatrixXd support(2, 1);
    support << 0.0, 1.0;
    return std::make_shared<CovariateDistribution>(CovariateDistribution::finite_law(support, {1.0 - p_one, p_one}));
  }

  // ---- direct evaluation from the graph (no local frames) ----

  double mu_at(OutcomeFn f, NodeId i, const std::vector<int>& t, const std::vector<double>& x) const {
    std::vector<int> tn;
    std::vector<double> xn, xo;
    for (NodeId j : graph.neighbors(i)) {
      tn.push_back(t[j]);
      xn.push_back(x[j]);
    }
    for (NodeId j : k_hop(graph, i, 2))
      if (j != i) xo.push_back(x[j]);
    return f(t[i], tn, x[i], xn, xo);
  }

  double treated_prob(PropensityFn f, NodeId j, const std::vector<double>& x) const {
    std::vector<double> xn;
    for (NodeId k : graph.neighbors(j)) xn.push_back(x[k]);
    return f(x[j], xn);
  }

  double joint_prob(PropensityFn f, NodeId i, const std::vector<int>& t, const std::vector<double>& x) const {
    double p = 1.0;
    for (NodeId j : closed_neighborhood(graph, i)) {
      const double q = treated_prob(f, j, x);
      p *= t[j] == 1 ? q : 1.0 - q;
    }
    return p;
  }

  struct Moments {
    double mean = 0.0;
    double var = 0.0;
  };

  /// Exact mean and variance of g(X) over profiles of N_i^{(2)}; the other
  /// nodes' covariates are irrelevant to g and held at zero.
  template <class G>
  Moments enumerate(NodeId i, G&& g) const {
    const auto members = k_hop(graph, i, 2);
    std::vector<double> x(size(), 0.0);
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << members.size()); ++mask) {
      double w = 1.0;
      for (std::size_t k = 0; k < members.size(); ++k) {
        const bool one = (mask >> k) & 1U;
        x[members[k]] = one ? 1.0 : 0.0;
        w *= one ? p_one : 1.0 - p_one;
      }
      const double v = g(x);
      m1 += w * v;
      m2 += w * v * v;
    }
    return {m1, std::max(0.0, m2 - m1 * m1)};
  }

  /// θ_i(t) with t given on all nodes (only N_i matters).
  double theta(NodeId i, const std::vector<int>& t) const {
    return enumerate(i, [&](const std::vector<double>& x) { return mu_at(mu_true, i, t, x); }).mean;
  }

  struct Draw {
    std::vector<double> x;
    std::vector<int> t;
    std::vector<double> y;
  };

  Draw draw(Rng& rng) const {
    std::bernoulli_distribution cov(p_one);
    std::normal_distribution<double> noise;
    Draw d;
    d.x.resize(size());
    d.t.resize(size());
    d.y.resize(size());
    for (auto& v : d.x) v = cov(rng) ? 1.0 : 0.0;
    for (std::size_t j = 0; j < size(); ++j) {
      std::bernoulli_distribution coin(treated_prob(pi_true, static_cast<NodeId>(j), d.x));
      d.t[j] = coin(rng) ? 1 : 0;
    }
    for (std::size_t i = 0; i < size(); ++i) d.y[i] = mu_at(mu_true, static_cast<NodeId>(i), d.t, d.x) + noise(rng);
    return d;
  }

  Dataset dataset(const Draw& d) const {
    Eigen::MatrixXd x(size(), 1);
    for (std::size_t j = 0; j < size(); ++j) x(j, 0) = d.x[j];
    return make_dataset(graph, d.y, d.t, x);
  }

  /// Bits of t over N_i in hood order ([i, neighbors...]).
  std::size_t pattern(NodeId i, const std::vector<int>& t) const {
    std::size_t key = static_cast<std::size_t>(t[i]);
    std::size_t bit = 1;
    for (NodeId j : graph.neighbors(i)) key |= static_cast<std::size_t>(t[j]) << bit++;
    return key;
  }

  std::vector<int> pattern_treatments(NodeId i, std::size_t key) const {
    std::vector<int> t(size(), 0);
    t[i] = key & 1U;
    std::size_t bit = 1;
    for (NodeId j : graph.neighbors(i)) t[j] = (key >> bit++) & 1U;
    return t;
  }
};

}  // namespace keceni::testing
