#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "keceni/estimator.hpp"
#include "keceni/simgen.hpp"

using namespace keceni;

TEST_SUITE("simgen") {
  TEST_CASE("edge probability") {
    CHECK(edge_probability(0.0, 2.0, 10.0) == doctest::Approx(2.0 * std::exp(-1.0)));
    CHECK(edge_probability(0.0, 2.0, 10.0) == doctest::Approx(0.7358).epsilon(1e-4));
    CHECK(edge_probability(5.0, 2.0, 10.0) < 1e-12);
    CHECK(edge_probability(0.0, 4.0, 10.0) == 1.0);
  }

  TEST_CASE("target selection") {
    Eigen::MatrixXd z(3, 2);
    z << 0.9, 0.9, 0.1, 0.2, 0.5, -0.8;
    CHECK(select_target(z) == 1);
    Eigen::MatrixXd one(1, 2);
    one << 0.7, -0.7;
    CHECK(select_target(one) == 0);
    Eigen::MatrixXd tie(3, 2);
    tie << 0.5, 0.1, 0.2, -0.3, -0.3, 0.0;
    CHECK(select_target(tie) == 1);
  }

  TEST_CASE("generators are deterministic") {
    auto a = gen_latent_network(150, 2.0, 10.0, 8);
    auto b = gen_latent_network(150, 2.0, 10.0, 8);
    CHECK(a.graph.edges() == b.graph.edges());
    CHECK(a.z == b.z);
    auto da = gen_nodewise_data(a.graph, {}, 4);
    auto db = gen_nodewise_data(a.graph, {}, 4);
    CHECK(da.y == db.y);
    CHECK(da.t == db.t);
    auto dc = gen_nodewise_data(a.graph, {}, 5);
    CHECK(da.y != dc.y);
  }

  TEST_CASE("nested subnetworks are nested") {
    auto pre = gen_latent_network(400, 2.0, 10.0, 3, 2.0);
    auto small = nested_subnetwork(pre, 100);
    auto large = nested_subnetwork(pre, 200);
    CHECK(small.graph.size() == 100);
    for (int i = 0; i < 100; ++i) {
      CHECK(small.z.row(i) == large.z.row(i));
      for (NodeId j : small.graph.neighbors(i)) CHECK(large.graph.has_edge(i, j));
    }
    for (int i = 1; i < 100; ++i) CHECK(small.z.row(i).cwiseAbs().maxCoeff() >= small.z.row(i - 1).cwiseAbs().maxCoeff());
  }

  TEST_CASE("treated fraction is one half without covariate tilt") {
    auto net = gen_latent_network(3000, 2.0, 10.0, 1);
    NodewiseCoefficients c;
    c.pi1 = {0, 0, 0};
    auto ds = gen_nodewise_data(net.graph, c, 2);
    double treated = 0.0;
    for (int t : ds.t) treated += t;
    const double sd = std::sqrt(0.25 / 3000.0);
    CHECK(std::abs(treated / 3000.0 - 0.5) < 3 * sd);
  }

  TEST_CASE("binary outcomes are fair coins when every coefficient is zero") {
    auto net = gen_latent_network(3000, 2.0, 10.0, 1);
    AteCoefficients c{0.0, 0.0, 0.0};
    auto ds = gen_ate_data(net.graph, c, 3);
    double ones = 0.0;
    for (double y : ds.y) ones += y;
    CHECK(std::abs(ones / 3000.0 - 0.5) < 3 * std::sqrt(0.25 / 3000.0));
  }

  TEST_CASE("node-wise truths") {
    std::vector<Edge> e{{0, 1}, {0, 2}, {1, 3}};
    auto g = Graph::build(4, e);
    NodewiseCoefficients c;
    CHECK(true_theta_nodewise(g, c, all_treated(g, 0)) == doctest::Approx(2.0));
    CHECK(true_theta_nodewise(g, c, none_treated(g, 0)) == doctest::Approx(-2.0));
    auto [u, t] = half_treated_pair(g, 0);
    CHECK(true_theta_nodewise(g, c, u) == doctest::Approx(-1.0));
    CHECK(true_theta_nodewise(g, c, t) == doctest::Approx(1.0));
    // Isolated target: the neighbor term vanishes.
    std::vector<Edge> none;
    auto lone = Graph::build(1, none);
    CHECK(true_theta_nodewise(lone, c, all_treated(lone, 0)) == doctest::Approx(1.0));
  }

  TEST_CASE("node-wise truth matches a Monte Carlo average") {
    auto net = gen_latent_network(300, 2.0, 10.0, 12);
    const NodeId target = select_target(net.z);
    NodewiseCoefficients c;
    auto sc = all_treated(net.graph, target);
    // Force the scenario by fixing every treatment to 1 and averaging Y at the target.
    const int reps = 4000;
    double sum = 0.0;
    for (int r = 0; r < reps; ++r) {
      auto ds = gen_nodewise_data(net.graph, c, 1000 + r);
      double avg_t = net.graph.degree(target) > 0 ? 0.5 : 0.0;
      double x_self = 0.0, x_outer = 0.0;
      for (int k = 0; k < 3; ++k) x_self += c.mu3[k] * ds.x(target, k);
      auto outer = k_hop(net.graph, target, 2);
      std::size_t m = 0;
      for (NodeId j : outer)
        if (j != target) {
          for (int k = 0; k < 3; ++k) x_outer += c.mu4[k] * ds.x(j, k);
          ++m;
        }
      if (m > 0) x_outer /= static_cast<double>(m);
      sum += c.mu0 + c.mu1 * 0.5 + c.mu2 * avg_t + x_self + x_outer;
    }
    CHECK(std::abs(sum / reps - true_theta_nodewise(net.graph, c, sc)) < 0.15);
  }

  TEST_CASE("binary-world truths") {
    std::vector<Edge> none;
    auto lone = Graph::build(1, none);
    AteCoefficients c;
    // No neighbors: Avg w = 0, so the mean is expit(±mu1/2).
    CHECK(true_theta_ate(lone, c, all_treated(lone, 0)) == doctest::Approx(expit(0.5)));
    CHECK(true_theta_ate(lone, c, none_treated(lone, 0)) == doctest::Approx(expit(-0.5)));

    // Two neighbors: Avg w ∈ {-1/4, 0, 1/4} with probabilities 1/4, 1/2, 1/4.
    std::vector<Edge> e{{0, 1}, {0, 2}};
    auto g = Graph::build(3, e);
    const double want = 0.25 * expit(0.5 + 7.0 / 4) + 0.5 * expit(0.5) + 0.25 * expit(0.5 - 7.0 / 4);
    CHECK(true_theta_ate(g, c, all_treated(g, 0)) == doctest::Approx(want));
  }

  TEST_CASE("population truths at the large-network scale") {
    auto net = gen_latent_network(4000, 2.0, 10.0, 20240501);
    AteCoefficients c;
    const double none = average_theta_ate(net.graph, c, 0);
    const double all = average_theta_ate(net.graph, c, 1);
    CHECK(none + all == doctest::Approx(1.0));
    CHECK(std::abs(none - 0.406) < 0.03);
    CHECK(std::abs(all - 0.594) < 0.03);
  }

  TEST_CASE("config echo") {
    SimConfig cfg;
    cfg.n = 200;
    cfg.seed = 7;
    auto j = cfg.to_json();
    CHECK(j.at("n") == 200);
    CHECK(j.at("seed") == 7);
    CHECK(replication_seed(7, 0) != replication_seed(7, 1));
  }
}
