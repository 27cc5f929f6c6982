#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "keceni/covariates.hpp"
#include "keceni/error.hpp"
#include "keceni/models.hpp"
#include "keceni/regression.hpp"

using namespace keceni;

TEST_SUITE("nuisance") {
  TEST_CASE("least squares examples") {
    Eigen::MatrixXd z(2, 2);
    z << 1, 0, 1, 1;
    Eigen::VectorXd y(2);
    y << 1, 3;
    auto fit = fit_least_squares(z, y);
    CHECK(fit.beta(0) == doctest::Approx(1.0));
    CHECK(fit.beta(1) == doctest::Approx(2.0));

    Eigen::MatrixXd zc(4, 2);
    zc << 1, 0.3, 1, -1, 1, 2, 1, 0.7;
    Eigen::VectorXd yc = Eigen::VectorXd::Constant(4, 2.5);
    auto flat = fit_least_squares(zc, yc);
    CHECK(flat.beta(0) == doctest::Approx(2.5));
    CHECK(std::abs(flat.beta(1)) < 1e-12);
  }

  TEST_CASE("least squares recovers noiseless coefficients") {
    Rng rng(3);
    std::normal_distribution<double> g;
    Eigen::MatrixXd z(200, 4);
    for (int i = 0; i < 200; ++i) {
      z(i, 0) = 1;
      for (int c = 1; c < 4; ++c) z(i, c) = g(rng);
    }
    Eigen::VectorXd beta(4);
    beta << 0.5, -1.25, 3, 0.001;
    Eigen::VectorXd y = z * beta;
    auto fit = fit_least_squares(z, y);
    CHECK((fit.beta - beta).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("collinear columns are a numeric error") {
    Eigen::MatrixXd z(5, 3);
    z << 1, 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8, 1, 5, 10;
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(5, 0, 1);
    std::vector<std::string> names{"one", "a", "b"};
    CHECK_THROWS_AS(fit_least_squares(z, y, names), NumericError);
  }

  TEST_CASE("logistic intercept-only MLE") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Ones(4, 1);
    Eigen::VectorXd y(4);
    y << 1, 1, 1, 0;
    auto fit = fit_logistic_regression(z, y);
    CHECK(fit.beta(0) == doctest::Approx(std::log(3.0)).epsilon(1e-6));
    CHECK(expit(fit.beta(0)) == doctest::Approx(0.75).epsilon(1e-6));

    Eigen::MatrixXd z2 = Eigen::MatrixXd::Ones(2, 1);
    Eigen::VectorXd y2(2);
    y2 << 1, 0;
    CHECK(std::abs(fit_logistic_regression(z2, y2).beta(0)) < 1e-8);
    CHECK(expit(0.5) == doctest::Approx(0.6225).epsilon(1e-4));
  }

  TEST_CASE("logistic recovers the generating coefficients") {
    Rng rng(9);
    std::normal_distribution<double> g;
    const int n = 4000;
    Eigen::MatrixXd z(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) z(i, c) = g(rng);
      std::bernoulli_distribution coin(expit(0.5 * z.row(i).sum()));
      y(i) = coin(rng) ? 1 : 0;
    }
    auto fit = fit_logistic_regression(z, y);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(fit.beta(c) - 0.5) < 0.15);
    CHECK(fit.gradient_norm < 1e-6);
  }

  TEST_CASE("logistic input checks") {
    Eigen::MatrixXd z = Eigen::MatrixXd::Ones(3, 1);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(fit_logistic_regression(z, ones), InputError);
    Eigen::VectorXd bad(3);
    bad << 0, 1, 2;
    CHECK_THROWS_AS(fit_logistic_regression(z, bad), InputError);

    Eigen::MatrixXd zs(4, 2);
    zs << 1, -2, 1, -1, 1, 1, 1, 2;
    Eigen::VectorXd ys(4);
    ys << 0, 0, 1, 1;
    CHECK_THROWS_AS(fit_logistic_regression(zs, ys), NumericError);
  }

  TEST_CASE("kernel regressor examples") {
    std::vector<KernelKey> keys{{{0.0}, {}}, {{1.0}, {}}, {{5.0}, {}}};
    std::vector<double> targets{2.0, 4.0, 10.0};
    KernelRegressor tiny(keys, targets, 1e-9, KeyMetric::l1);
    CHECK(tiny.predict({{1.0}, {}}) == doctest::Approx(4.0));

    KernelRegressor mid(keys, targets, 2.0, KeyMetric::l1);
    CHECK(mid.predict({{0.5}, {}}) == doctest::Approx(3.0));

    std::vector<double> flat{7.0, 7.0, 7.0};
    KernelRegressor constant(keys, flat, 1.5, KeyMetric::l1);
    for (double q : {-3.0, 0.2, 2.5, 40.0}) CHECK(constant.predict({{q}, {}}) == doctest::Approx(7.0));

    // Outside every kernel: nearest key's target.
    CHECK(tiny.predict({{4.0}, {}}) == doctest::Approx(10.0));
  }

  TEST_CASE("wasserstein keys treat multisets by proportion") {
    PointMultiset a(1), b(1);
    std::vector<double> zero{0.0}, one{1.0};
    a.add(zero);
    a.add(one);
    b.add(zero, 2);
    b.add(one, 2);
    std::vector<KernelKey> keys{{{1.0}, a}};
    std::vector<double> targets{3.0};
    KernelRegressor reg(keys, targets, 0.5, KeyMetric::wasserstein);
    CHECK(reg.distance({{1.0}, a}, {{1.0}, b}) == doctest::Approx(0.0));
    CHECK(canonical_measure(a) == canonical_measure(b));
  }

  TEST_CASE("joint propensity is a product over the neighborhood") {
    auto g = testing::path_graph(3);
    auto ds = testing::linear_world(g, 1, true);
    NeighborhoodIndex index(ds);
    auto pm = PropensityModel::custom([](const NodeContext&) { return 0.5; });
    LocalFrame frame(index.at(0));
    frame.bind_observed(index);
    std::vector<int> hood_t{1, 0};
    CHECK(joint_propensity(pm, frame, hood_t) == doctest::Approx(0.25));

    std::vector<Edge> none;
    auto lone = testing::linear_world(Graph::build(1, none), 2, true);
    NeighborhoodIndex li(lone);
    auto tilted = PropensityModel::custom([](const NodeContext&) { return 0.8; });
    LocalFrame lf(li.at(0));
    lf.bind_observed(li);
    std::vector<int> t1{1}, t0{0};
    CHECK(joint_propensity(tilted, lf, t1) == doctest::Approx(0.8));
    CHECK(joint_propensity(tilted, lf, t0) == doctest::Approx(0.2));
  }

  TEST_CASE("propensity clamp") {
    auto pm = PropensityModel::custom([](const NodeContext&) { return 1.0; }, 1e-3);
    NodeContext ctx;
    CHECK(pm.probability(1, ctx) == doctest::Approx(1 - 1e-3));
    CHECK(pm.probability(0, ctx) == doctest::Approx(1e-3));
  }

  TEST_CASE("model JSON round trip") {
    auto ds = testing::linear_world(testing::ring_graph(60), 4, false, 2);
    NeighborhoodIndex index(ds);
    NuisanceSpec spec;
    auto mu = fit_outcome_model(ds, index, spec);
    auto back = OutcomeModel::from_json(mu.to_json(), 2);
    CHECK((back.beta() - mu.beta()).norm() == doctest::Approx(0.0));
    auto pi = fit_propensity_model(ds, index, spec);
    auto pback = PropensityModel::from_json(pi.to_json(), 2);
    CHECK((pback.beta() - pi.beta()).norm() == doctest::Approx(0.0));
  }

  TEST_CASE("covariate sampling") {
    Eigen::MatrixXd one(1, 2);
    one << 0.3, -1;
    auto single = CovariateDistribution::empirical(one);
    for (const auto& prof : sample_covariate_profiles(single, 4, 20, 1))
      for (auto k : prof) CHECK(k == 0);

    Eigen::MatrixXd five(5, 1);
    five << 0, 1, 2, 3, 4;
    auto cd = CovariateDistribution::empirical(five);
    const std::size_t m = 100000;
    auto draws = sample_covariate_profiles(cd, 1, m, 77);
    std::vector<double> freq(5, 0.0);
    for (const auto& d : draws) freq[d[0]] += 1.0;
    const double sd = std::sqrt(0.2 * 0.8 / m);
    for (double f : freq) CHECK(std::abs(f / m - 0.2) < 3 * sd);
    CHECK(sample_covariate_profiles(cd, 3, 50, 9) == sample_covariate_profiles(cd, 3, 50, 9));
  }
}
