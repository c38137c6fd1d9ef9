// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rpda/parallel.hpp"
#include "rpda/rng.hpp"

using namespace rpda;

TEST_CASE("bounded matches the exact 128-bit product") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t w = rng.next();
    const std::uint32_t n = static_cast<std::uint32_t>(rng.next() >> 33) + 1;
    const auto exact = static_cast<std::uint32_t>((static_cast<unsigned __int128>(w) * n) >> 64);
    REQUIRE(bounded(w, n) == exact);
  }
  CHECK(bounded(~0ULL, 10) == 9);
  CHECK(bounded(0, 10) == 0);
}

TEST_CASE("derived seeds separate streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 50; ++a) {
    for (std::uint64_t b = 0; b < 50; ++b) seen.insert(derive_seed(1, a, b));
  }
  CHECK(seen.size() == 2500);
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("same seed gives the same sequence") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) {
    REQUIRE(a.normal() == b.normal());
    REQUIRE(a.uniform() == b.uniform());
  }
}

TEST_CASE("variates have the right first two moments") {
  Rng rng(3);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, sc = 0;
  double umin = 1, umax = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    sc += std::norm(rng.complex_normal(2.5));
  }
  CHECK(umin > 0.0);
  CHECK(umax < 1.0);
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 4.0 / std::sqrt(n));
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sc / n == doctest::Approx(2.5).epsilon(0.02));
}

TEST_CASE("parallel_for results do not depend on worker count") {
  auto run = [](unsigned jobs) {
    std::vector<double> out(1000);
    parallel_for(out.size(), [&](std::size_t i) {
      Rng r(derive_seed(9, i));
      out[i] = r.normal();
    }, jobs);
    return pairwise_sum(out.data(), out.size());
  };
  const double one = run(1);
  CHECK(run(2) == one);
  CHECK(run(7) == one);
}

TEST_CASE("parallel_for rethrows worker exceptions") {
  CHECK_THROWS_AS(parallel_for(
                      100,
                      [](std::size_t i) {
                        if (i == 37) throw std::runtime_error("boom");
                      },
                      4),
                  std::runtime_error);
}

TEST_CASE("pairwise_sum is accurate") {
  std::vector<double> v(1 << 20, 0.1);
  CHECK(pairwise_sum(v.data(), v.size()) == doctest::Approx(0.1 * (1 << 20)).epsilon(1e-14));
  CHECK(pairwise_sum(v.data(), 0) == 0.0);
}
