#include <doctest.h>

#include <cmath>

#include "subibp/rng.hpp"

using subibp::RngStream;

TEST_CASE("streams are pure functions of (master, purpose, index)") {
  RngStream a(42, 1, 7), b(42, 1, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(42, 1, 8), d(42, 2, 7), e(43, 1, 7);
  RngStream ref(42, 1, 7);
  const auto r0 = ref.next_u64();
  CHECK(c.next_u64() != r0);
  CHECK(d.next_u64() != r0);
  CHECK(e.next_u64() != r0);
}

TEST_CASE("uniform stays in [0,1) and uniform_open in (0,1)") {
  RngStream rng(1, 0, 0);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double v = rng.uniform_open();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("normal draws match N(0,1) moments") {
  RngStream rng(7, 0, 0);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  const double mean = s1 / n;
  const double var = s2 / n - mean * mean;
  // 4-sigma tolerances on the moment estimators
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("exponential draws have unit mean") {
  RngStream rng(11, 0, 0);
  const int n = 100000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += rng.exponential();
  CHECK(std::abs(s / n - 1.0) < 4.0 / std::sqrt(static_cast<double>(n)));
}
