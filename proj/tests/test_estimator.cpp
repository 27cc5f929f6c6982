#include <doctest.h>

#include <cmath>
#include <limits>

#include "fixtures.hpp"
#include "keceni/dissimilarity.hpp"
#include "keceni/error.hpp"
#include "keceni/estimator.hpp"

using namespace keceni;

namespace {

std::vector<PseudoOutcome> outcomes(std::initializer_list<double> xi) {
  std::vector<PseudoOutcome> po;
  NodeId k = 0;
  for (double v : xi) {
    PseudoOutcome p;
    p.node = k++;
    p.xi = v;
    po.push_back(p);
  }
  return po;
}

}  // namespace

TEST_SUITE("dissimilarity") {
  TEST_CASE("summary l1 examples") {
    CHECK(summary_l1({1, {1, 1}}, {1, {1, 1}}) == doctest::Approx(0.0));
    CHECK(summary_l1({0, {0, 0}}, {1, {1, 1}}) == doctest::Approx(2.0));
    CHECK(summary_l1({1, {}}, {1, {1, 1}}) == doctest::Approx(0.5));
  }

  TEST_CASE("wasserstein treatment examples") {
    CHECK(wasserstein_treatment({1, {0, 1}}, {1, {1, 0}}) == doctest::Approx(0.0));
    CHECK(wasserstein_treatment({0, {0, 0}}, {1, {1, 1}}) == doctest::Approx(2.0));
    CHECK(wasserstein_treatment({1, {0, 1}}, {1, {1, 1}}) == doctest::Approx(0.5));
    // A lone empty side is a point mass at one half.
    CHECK(wasserstein_treatment({1, {}}, {1, {1, 1}}) == doctest::Approx(0.5));
    CHECK(std::isinf(wasserstein_treatment({1, {}}, {1, {1}}, EmptyPolicy::exclude)));
    CHECK(wasserstein_treatment({1, {}}, {1, {}}) == doctest::Approx(0.0));
  }

  TEST_CASE("metric names parse") {
    CHECK(DissimilarityMetric::parse("summary-l1").kind == DissimilarityKind::summary_l1);
    CHECK(DissimilarityMetric::parse("wasserstein-treatment").kind == DissimilarityKind::wasserstein_treatment);
    CHECK_THROWS_AS(DissimilarityMetric::parse("cosine"), InputError);
  }
}

TEST_SUITE("keceni_estimator") {
  TEST_CASE("single exact match") {
    auto po = outcomes({4.0, 1.0, 2.0});
    std::vector<double> delta{0.0, 3.0, 5.0};
    auto est = kernel_smooth(delta, po, Kernel{KernelShape::triangular, 1.0});
    CHECK(est.theta == doctest::Approx(4.0));
    CHECK(est.d_hat == doctest::Approx(1.0));
  }

  TEST_CASE("equal dissimilarities give the plain mean") {
    auto po = outcomes({4.0, 1.0, 2.0, -3.0});
    std::vector<double> delta(4, 0.3);
    auto est = kernel_smooth(delta, po, Kernel{KernelShape::triangular, 1.0});
    CHECK(est.theta == doctest::Approx(1.0));
  }

  TEST_CASE("box kernel past max delta gives the plain mean") {
    auto po = outcomes({4.0, 1.0, 2.0, -3.0, 6.0});
    std::vector<double> delta{0.0, 0.5, 1.0, 1.5, 2.0};
    auto est = kernel_smooth(delta, po, Kernel{KernelShape::box, 2.0 + 1e-9});
    CHECK(est.theta == doctest::Approx(2.0));
  }

  TEST_CASE("excluded and invalid units carry no weight") {
    auto po = outcomes({4.0, 100.0, 2.0});
    po[2].xi = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> delta{0.0, 0.0, 0.0};
    std::vector<NodeId> ex{1};
    auto est = kernel_smooth(delta, po, Kernel{KernelShape::triangular, 1.0}, ex);
    CHECK(est.theta == doctest::Approx(4.0));
    CHECK(est.weight[1] == 0.0);
    CHECK(est.weight[2] == 0.0);
  }

  TEST_CASE("empty kernel reports the smallest dissimilarity") {
    auto po = outcomes({1.0, 2.0});
    std::vector<double> delta{2.0, 1.5};
    try {
      (void)kernel_smooth(delta, po, Kernel{KernelShape::triangular, 1.0});
      FAIL("expected EmptyKernelError");
    } catch (const EmptyKernelError& e) {
      CHECK(e.min_delta() == doctest::Approx(1.5));
    }
  }

  TEST_CASE("constant outcome model integrates to the constant") {
    auto ds = testing::linear_world(testing::path_graph(6), 2, true);
    NeighborhoodIndex index(ds);
    auto mu = std::make_shared<OutcomeModel>(OutcomeModel::custom([](const OutcomeContext&) { return 1.75; }));
    auto pi = std::make_shared<PropensityModel>(PropensityModel::custom([](const NodeContext&) { return 0.5; }));
    auto cov = std::make_shared<CovariateDistribution>(CovariateDistribution::empirical(ds.x));
    NuisanceBundle nb{mu, pi, cov};
    CHECK(g_computation(ds, index, nb, all_treated(ds.graph, 2), McOptions{}, 1) == doctest::Approx(1.75));

    // Zero residual: the pseudo-outcome collapses to the integral term.
    for (auto& y : ds.y) y = 1.75;
    auto po = pseudo_outcomes(ds, index, nb, McOptions{}, 1);
    for (const auto& p : po) CHECK(p.xi == doctest::Approx(1.75));
  }

  TEST_CASE("isolated target has a degenerate spillover contrast") {
    std::vector<Edge> e{{0, 1}, {1, 2}};
    auto ds = testing::linear_world(Graph::build(4, e), 1, true);
    auto [hi, lo] = spe_pair(ds.graph, 3, 1);
    CHECK(hi == lo);
  }

  TEST_CASE("scenario builders") {
    auto g = testing::path_graph(4);
    auto [u, t] = half_treated_pair(g, 1);
    CHECK(u.value(1) == 0);
    CHECK(t.value(1) == 1);
    CHECK(u.value(0) + u.value(2) == 1);
    auto none = none_treated(g, 1);
    CHECK(none.local().neighbors == std::vector<int>{0, 0});
  }

  TEST_CASE("group aggregation") {
    std::vector<double> v{1, 2, 3, 4, 5};
    std::vector<std::size_t> deg{0, 1, 2, 5, 6};
    auto single = aggregate_over_nodes(v, deg);
    REQUIRE(single.size() == 1);
    CHECK(single[0].mean == doctest::Approx(3.0));
    std::vector<std::size_t> edges{0, 2};
    auto bins = aggregate_over_nodes(v, deg, edges);
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].count == 2);
    CHECK(bins[0].mean == doctest::Approx(1.5));
    CHECK(bins[1].mean == doctest::Approx(4.0));
  }

  TEST_CASE("no-interference AIPW recovers a direct effect") {
    std::vector<Edge> none;
    const std::size_t n = 4000;
    auto g = Graph::build(n, none);
    Rng rng(31);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd x(n, 1);
    std::vector<int> t(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x(i, 0) = gauss(rng);
      std::bernoulli_distribution coin(expit(0.5 * x(i, 0)));
      t[i] = coin(rng);
      y[i] = 2.0 * t[i] + x(i, 0) + gauss(rng);
    }
    auto ds = make_dataset(g, y, t, x);
    auto r = aipw_sutva(ds);
    CHECK(std::abs(r.difference - 2.0) < 0.15);
  }
}
