#include <doctest.h>

#include "properties.hpp"

using namespace keceni;

TEST_SUITE("properties") {
  TEST_CASE("kernel-weight normalization") {
    auto c = testing::kernel_normalization_property();
    INFO(c.detail);
    CHECK(c.pass);
  }
  TEST_CASE("relabeling invariance") {
    auto c = testing::relabeling_invariance_property();
    INFO(c.detail);
    CHECK(c.pass);
  }
  TEST_CASE("IRLS gradient") {
    auto c = testing::irls_gradient_property();
    INFO(c.detail);
    CHECK(c.pass);
  }
  TEST_CASE("xi partials") {
    auto c = testing::xi_partials_property();
    INFO(c.detail);
    CHECK(c.pass);
  }
  TEST_CASE("thread determinism") {
    auto c = testing::thread_determinism_property();
    INFO(c.detail);
    CHECK(c.pass);
  }
}
