#include "doctest.h"

#include <cmath>

#include "aeloc/rng.hpp"

using aeloc::Rng;

TEST_CASE("same seed gives the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform values stay in [0, 1)") {
  Rng r(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.next_uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("gaussian moments") {
  Rng r(123);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = r.next_gaussian();
    sum += g;
    sum2 += g * g;
  }
  CHECK(std::fabs(sum / n) < 0.01);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("mix_seed separates streams") {
  CHECK(aeloc::mix_seed(1, 0) != aeloc::mix_seed(1, 1));
  CHECK(aeloc::mix_seed(1, 0) != aeloc::mix_seed(2, 0));
  CHECK(aeloc::mix_seed(5, 9) == aeloc::mix_seed(5, 9));
}

TEST_CASE("state save and restore resumes the stream") {
  Rng r(99);
  r.next_gaussian();
  const auto s = r.state();
  const auto a = r.next_u64();
  r.set_state(s);
  CHECK(r.next_u64() == a);
}
