#include <doctest.h>

#include "keceni/error.hpp"
#include "keceni/transport.hpp"
#include "oracles.hpp"

using namespace keceni;

namespace {

PointMultiset line(std::initializer_list<double> pts) {
  std::vector<double> v(pts);
  return PointMultiset::from_points(1, v);
}

PointMultiset plane(std::initializer_list<double> flat) {
  std::vector<double> v(flat);
  return PointMultiset::from_points(2, v);
}

}  // namespace

TEST_SUITE("transport") {
  TEST_CASE("real line examples") {
    std::vector<double> a{0}, b{1};
    CHECK(w1_real_line(a, b) == doctest::Approx(1.0));
    std::vector<double> c{0, 1}, d{0, 1};
    CHECK(w1_real_line(c, d) == doctest::Approx(0.0));
    std::vector<double> e{0, 0, 1, 1}, f{1, 1, 1, 1};
    CHECK(w1_real_line(e, f) == doctest::Approx(0.5));
    std::vector<double> g{0, 3}, h{1};
    CHECK(w1_real_line(g, h) == doctest::Approx(1.5));
  }

  TEST_CASE("plane examples") {
    CHECK(w1_discrete(plane({0, 0}), plane({1, 1})) == doctest::Approx(2.0));
    CHECK(w1_discrete(plane({0, 0, 1, 1}), plane({0, 0, 1, 1})) == doctest::Approx(0.0));
    CHECK(w1_discrete(plane({0, 0, 1, 1}), plane({0, 1, 1, 0})) == doctest::Approx(1.0));
    CHECK(w1_discrete(line({0, 0, 1, 1}), line({1, 1, 1, 1})) == doctest::Approx(0.5));
  }

  TEST_CASE("empty or oversized sides are input errors") {
    PointMultiset empty(1);
    CHECK_THROWS_AS(w1_discrete(empty, line({1})), InputError);
    PointMultiset big(1);
    std::vector<double> p{0.0};
    big.add(p, 100);
    CHECK_THROWS_AS(w1_discrete(big, line({1})), InputError);
  }

  TEST_CASE("real line agrees with the min-cost flow") {
    Rng rng(11);
    std::uniform_real_distribution<double> u(-2, 2);
    std::uniform_int_distribution<int> len(1, 7);
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<double> a(len(rng)), b(len(rng));
      for (auto& v : a) v = u(rng);
      for (auto& v : b) v = u(rng);
      auto ma = PointMultiset::from_points(1, a);
      auto mb = PointMultiset::from_points(1, b);
      CHECK(w1_discrete(ma, mb) == doctest::Approx(w1_real_line(a, b)).epsilon(1e-12));
    }
  }

  TEST_CASE("min-cost flow matches brute-force coupling") {
    Rng rng(5);
    for (int rep = 0; rep < 60; ++rep) {
      auto a = testing::random_multiset(rng, 3, 4, 3, rep % 2 == 0);
      auto b = testing::random_multiset(rng, 3, 4, 3, rep % 2 == 0);
      CHECK(std::abs(w1_discrete(a, b) - testing::brute_force_w1(a, b)) <= 1e-9);
    }
  }

  TEST_CASE("binary cube fast path matches the general solver") {
    Rng rng(17);
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<int> len(1, 9);
    for (std::size_t d = 1; d <= kMaxCubeDim; ++d) {
      for (int rep = 0; rep < 150; ++rep) {
        PointMultiset a(d), b(d);
        std::vector<double> p(d);
        for (int k = len(rng); k > 0; --k) {
          for (auto& v : p) v = coin(rng) ? 1.0 : 0.0;
          a.add(p);
        }
        for (int k = len(rng); k > 0; --k) {
          for (auto& v : p) v = coin(rng) ? 1.0 : 0.0;
          b.add(p);
        }
        REQUIRE(on_binary_cube(a));
        CHECK(w1_binary_cube(a, b) == doctest::Approx(w1_discrete(a, b)).epsilon(1e-12));
      }
    }
    CHECK_FALSE(on_binary_cube(line({0.5})));
  }

  TEST_CASE("metric axioms") {
    Rng rng(23);
    for (int rep = 0; rep < 200; ++rep) {
      auto a = testing::random_multiset(rng, 2, 4, 2, false);
      auto b = testing::random_multiset(rng, 2, 4, 2, false);
      auto c = testing::random_multiset(rng, 2, 4, 2, false);
      const double ab = w1_discrete(a, b), ba = w1_discrete(b, a);
      CHECK(w1_discrete(a, a) == doctest::Approx(0.0));
      CHECK(ab >= 0.0);
      CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
      CHECK(ab <= w1_discrete(a, c) + w1_discrete(c, b) + 1e-9);
    }
  }

  TEST_CASE("measures with equal proportions are at distance zero") {
    CHECK(w1_discrete(line({0, 1}), line({0, 0, 1, 1})) == doctest::Approx(0.0));
  }
}
