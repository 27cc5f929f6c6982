#include <doctest.h>

#include <cmath>

#include "keceni/estimator.hpp"
#include "oracle_world.hpp"

using namespace keceni;
using keceni::testing::OracleWorld;

TEST_SUITE("pseudo_outcome oracle") {
  TEST_CASE("4-node Monte Carlo integrals agree with enumeration") {
    const auto world = OracleWorld::four_nodes();
    const NuisanceBundle nb{OracleWorld::outcome_model(OracleWorld::mu_true),
                            OracleWorld::propensity_model(OracleWorld::pi_true), world.law()};
    auto rng = make_rng(3, Stream::oracle, 0);
    const auto d = world.draw(rng);
    const auto ds = world.dataset(d);
    const NeighborhoodIndex index(ds);
    McOptions mc;
    mc.draws = 20000;
    mc.exact_limit = 0;
    for (NodeId i = 0; i < 4; ++i) {
      const auto exact = pseudo_outcome(ds, index, nb, i, McOptions{}, 1);
      const auto approx = pseudo_outcome(ds, index, nb, i, mc, 1);
      const auto m = world.enumerate(i, [&](const std::vector<double>& x) { return world.mu_at(OracleWorld::mu_true, i, d.t, x); });
      const auto v = world.enumerate(i, [&](const std::vector<double>& x) { return world.joint_prob(OracleWorld::pi_true, i, d.t, x); });
      CHECK(exact.exact);
      CHECK(exact.m == doctest::Approx(m.mean).epsilon(1e-12));
      CHECK(exact.varpi == doctest::Approx(v.mean).epsilon(1e-12));
      CHECK(std::abs(approx.m - m.mean) <= 4 * std::sqrt(m.var / mc.draws));
      CHECK(std::abs(approx.varpi - v.mean) <= 4 * std::sqrt(v.var / mc.draws));
    }
  }

  TEST_CASE("pseudo-outcome pieces at the observed data") {
    const auto world = OracleWorld::four_nodes();
    const NuisanceBundle nb{OracleWorld::outcome_model(OracleWorld::mu_true),
                            OracleWorld::propensity_model(OracleWorld::pi_true), world.law()};
    auto rng = make_rng(4, Stream::oracle, 0);
    const auto d = world.draw(rng);
    const auto ds = world.dataset(d);
    const NeighborhoodIndex index(ds);
    for (NodeId i = 0; i < 4; ++i) {
      const auto po = pseudo_outcome(ds, index, nb, i, McOptions{}, 1);
      CHECK(po.mu == doctest::Approx(world.mu_at(OracleWorld::mu_true, i, d.t, d.x)));
      CHECK(po.pi == doctest::Approx(world.joint_prob(OracleWorld::pi_true, i, d.t, d.x)));
      CHECK(po.xi == doctest::Approx((po.y - po.mu) / po.pi * po.varpi + po.m));
    }
  }

  TEST_CASE("double robustness in a short simulation") {
    // Under a correct outcome model ξ̂ is unbiased for θ given the pattern
    // whatever the propensity; checked on the all-untreated pattern of node 0.
    const auto world = OracleWorld::four_nodes();
    const NuisanceBundle nb{OracleWorld::outcome_model(OracleWorld::mu_true),
                            OracleWorld::propensity_model(OracleWorld::pi_wrong), world.law()};
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (std::size_t w = 0; w < 3000; ++w) {
      auto rng = make_rng(8, Stream::oracle, w);
      const auto d = world.draw(rng);
      if (world.pattern(0, d.t) != 0) continue;
      const auto ds = world.dataset(d);
      const NeighborhoodIndex index(ds);
      const double xi = pseudo_outcome(ds, index, nb, 0, McOptions{}, 1).xi;
      sum += xi;
      sum2 += xi * xi;
      ++count;
    }
    REQUIRE(count > 100);
    const double mean = sum / count;
    const double se = std::sqrt((sum2 / count - mean * mean) / count);
    CHECK(std::abs(mean - world.theta(0, world.pattern_treatments(0, 0))) <= 4 * se);
  }
}
