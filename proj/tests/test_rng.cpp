#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "svrsqp/rng.hpp"

using svrsqp::Rng;

TEST_CASE("identical seeds reproduce the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
}

TEST_CASE("different seeds give different streams") {
  Rng a(1), b(2);
  int collisions = 0;
  for (int i = 0; i < 1000; ++i) {
    if (a.next_u64() == b.next_u64()) {
      ++collisions;
    }
  }
  CHECK(collisions == 0);
}

TEST_CASE("split streams are independent of parent consumption") {
  Rng parent(7);
  Rng child_before = parent.split(3, 4);
  for (int i = 0; i < 50; ++i) {
    parent.next_u64();
  }
  Rng child_after = parent.split(3, 4);
  for (int i = 0; i < 100; ++i) {
    CHECK(child_before.next_u64() == child_after.next_u64());
  }
}

TEST_CASE("split lanes do not collide") {
  Rng parent(7);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t a = 0; a < 64; ++a) {
    for (std::uint64_t b = 0; b < 64; ++b) {
      firsts.insert(parent.split(a, b).next_u64());
    }
  }
  CHECK(firsts.size() == 64 * 64);
}

TEST_CASE("next_below stays in range and covers small supports") {
  Rng rng(99);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 3000; ++i) {
    std::uint64_t v = rng.next_below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("next_below is roughly uniform") {
  Rng rng(5);
  constexpr int kBuckets = 10;
  constexpr int kDraws = 100000;
  std::vector<int> counts(kBuckets, 0);
  for (int i = 0; i < kDraws; ++i) {
    ++counts[rng.next_below(kBuckets)];
  }
  // chi-squared with 9 degrees of freedom, 99.9% quantile is about 27.9
  double chi2 = 0.0;
  double expected = static_cast<double>(kDraws) / kBuckets;
  for (int count : counts) {
    chi2 += (count - expected) * (count - expected) / expected;
  }
  CHECK(chi2 < 27.9);
}

TEST_CASE("next_unit lies in [0,1) with sane mean") {
  Rng rng(11);
  double sum = 0.0;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    double u = rng.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / kDraws - 0.5) < 0.01);
}

TEST_CASE("gaussian draws have standard moments") {
  Rng rng(13);
  constexpr int kDraws = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    double g = rng.next_gaussian();
    sum += g;
    sum_sq += g * g;
  }
  double mean = sum / kDraws;
  double var = sum_sq / kDraws - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("iteration packing is injective over realistic ranges") {
  std::set<std::uint64_t> packed;
  for (std::uint64_t outer = 0; outer < 100; ++outer) {
    for (std::uint64_t inner = 0; inner < 100; ++inner) {
      packed.insert(svrsqp::pack_iteration(outer, inner));
    }
  }
  CHECK(packed.size() == 100 * 100);
}
