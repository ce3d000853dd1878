#include "marlens/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace marlens;

TEST_SUITE("rng") {

TEST_CASE("same seed, same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.uniform_int(17) == b.uniform_int(17));
    CHECK(a.uniform() == b.uniform());
    CHECK(a.normal() == b.normal());
  }
}

TEST_CASE("uniform_int stays in range and hits every value") {
  Rng rng(7);
  std::vector<int> hits(6, 0);
  for (int i = 0; i < 6000; ++i) {
    const int v = rng.uniform_int(6);
    REQUIRE(v >= 0);
    REQUIRE(v < 6);
    ++hits[v];
  }
  for (int h : hits) CHECK(h > 800); // ~1000 expected per bucket
}

TEST_CASE("uniform_range is inclusive") {
  Rng rng(7);
  bool saw_lo = false, saw_hi = false;
  for (int i = 0; i < 1000; ++i) {
    const int v = rng.uniform_range(2, 4);
    REQUIRE(v >= 2);
    REQUIRE(v <= 4);
    saw_lo = saw_lo || v == 2;
    saw_hi = saw_hi || v == 4;
  }
  CHECK(saw_lo);
  CHECK(saw_hi);
}

TEST_CASE("uniform lies in [0, 1)") {
  Rng rng(11);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("normal has roughly standard moments") {
  Rng rng(13);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 0.03);
  CHECK(sq / n - mean * mean == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("split streams differ from the parent and each other") {
  Rng parent(99);
  Rng a = parent.split(0);
  Rng b = parent.split(1);
  int same = 0;
  for (int i = 0; i < 100; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);
}

} // TEST_SUITE
