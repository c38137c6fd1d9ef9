// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rpda/access_stats.hpp"

using namespace rpda;

namespace {

// Direct product-form binomial for small n.
double naive_binomial(int n, double p, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

}  // namespace

TEST_CASE("activation pmf spot values") {
  CHECK(activation_pmf({4, 1.0}, 4) == doctest::Approx(1.0));
  CHECK(activation_pmf({4, 1.0}, 3) == 0.0);
  CHECK(activation_pmf({2, 0.5}, 1) == doctest::Approx(0.5));
  CHECK(activation_pmf({5, 0.0}, 0) == doctest::Approx(1.0));
  for (int k = 0; k <= 12; ++k) {
    CHECK(activation_pmf({12, 0.3}, k) == doctest::Approx(naive_binomial(12, 0.3, k)).epsilon(1e-12));
  }
}

TEST_CASE("activation pmf sums to one with the stated mean") {
  for (auto [n, p] : std::vector<std::pair<int, double>>{{1, 0.2}, {800, 0.05}, {2000, 0.5}, {100000, 0.001}}) {
    double mass = 0, mean = 0;
    for (int k = 0; k <= n; ++k) {
      const double q = activation_pmf({n, p}, k);
      mass += q;
      mean += k * q;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean == doctest::Approx(n * p).epsilon(1e-10));
  }
}

TEST_CASE("activation pmf rejects out-of-range counts") {
  CHECK_THROWS_AS(activation_pmf({4, 0.5}, 5), std::domain_error);
  CHECK_THROWS_AS(activation_pmf({4, 0.5}, -1), std::domain_error);
}

TEST_CASE("collision pmf spot values and moments") {
  CHECK(collision_pmf({1, 7}, 0) == doctest::Approx(1.0));
  CHECK(collision_pmf({3, 2}, 1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(collision_pmf({0, 2}, 0), std::domain_error);
  CHECK_THROWS_AS(collision_pmf({3, 2}, 3), std::domain_error);
  for (auto [ka, tp] : std::vector<std::pair<int, int>>{{41, 20}, {1, 1}, {300, 7}, {2, 1}}) {
    double mass = 0, mean = 0;
    for (int c = 0; c < ka; ++c) {
      const double q = collision_pmf({ka, tp}, c);
      mass += q;
      mean += c * q;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(mean - static_cast<double>(ka - 1) / tp) < 1e-10);
  }
}

TEST_CASE("truncated support keeps all but eps of the mass") {
  const TruncatedSupport full = truncate_support(ActivationLaw{10, 1.0}, 1e-9);
  CHECK(full.lo == 10);
  CHECK(full.hi == 10);
  CHECK(full.covered_mass == doctest::Approx(1.0));

  for (auto [n, p] : std::vector<std::pair<int, double>>{{800, 0.05}, {2000, 0.3}, {50, 0.9}}) {
    for (double eps : {1e-3, 1e-6, 1e-9}) {
      const TruncatedSupport s = truncate_support(ActivationLaw{n, p}, eps);
      double mass = 0;
      for (int k = s.lo; k <= s.hi; ++k) mass += activation_pmf({n, p}, k);
      CHECK(mass >= 1.0 - eps - 1e-13);
      CHECK(s.covered_mass == doctest::Approx(mass).epsilon(1e-12));
      CHECK(s.lo <= static_cast<int>(n * p));
      CHECK(s.hi >= static_cast<int>(n * p));
    }
  }
  const TruncatedSupport c = truncate_support(CollisionLaw{41, 20}, 1e-6);
  CHECK(c.lo <= 2);
  CHECK(c.hi >= 2);
  CHECK(c.covered_mass >= 1.0 - 1e-6);
  CHECK_THROWS(truncate_support(ActivationLaw{10, 0.5}, 0.0));
  CHECK_THROWS(truncate_support(ActivationLaw{10, 0.5}, 1.0));
}

TEST_CASE("active-set sampling") {
  Rng rng(5);
  CHECK(sample_active_set({100, 0.0}, rng).empty());
  CHECK(sample_active_set({100, 1.0}, rng).size() == 100);
  const int k = 100;
  const int draws = 100000;
  double total = 0;
  for (int i = 0; i < draws; ++i) total += sample_active_set({k, 0.05}, rng).size();
  const double frac = total / (static_cast<double>(k) * draws);
  const double sigma = std::sqrt(0.05 * 0.95 / (static_cast<double>(k) * draws));
  CHECK(std::abs(frac - 0.05) < 3 * sigma);
}

TEST_CASE("simulated collider histogram matches the mixture law") {
  // Random activation then uniform pilots; the collider count of a tagged
  // active device follows sum_Ka p(Ka) Ka p(c|Ka) / E[Ka].
  const int k = 50;
  const double pa = 0.2;
  const int tp = 6;
  const ActivationLaw law{k, pa};
  std::vector<double> mix(k, 0.0);
  for (int ka = 1; ka <= k; ++ka) {
    const double w = activation_pmf(law, ka) * ka / law.mean();
    for (int c = 0; c < ka; ++c) mix[c] += w * collision_pmf({ka, tp}, c);
  }
  Rng rng(11);
  std::vector<double> hist(k, 0.0);
  long tagged = 0;
  for (int it = 0; it < 200000; ++it) {
    const std::vector<int> act = sample_active_set(law, rng);
    std::vector<int> count(tp, 0);
    std::vector<int> pilot(act.size());
    for (std::size_t i = 0; i < act.size(); ++i) ++count[pilot[i] = static_cast<int>(rng.below(tp))];
    for (std::size_t i = 0; i < act.size(); ++i) {
      hist[count[pilot[i]] - 1] += 1;
      ++tagged;
    }
  }
  double tv = 0;
  for (int c = 0; c < k; ++c) tv += std::abs(hist[c] / tagged - mix[c]);
  CHECK(0.5 * tv < 0.01);
}
