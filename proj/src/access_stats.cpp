// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rpda/access_stats.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rpda {
namespace {

int binomial_mode(int n, double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  const int mode = static_cast<int>(std::floor((n + 1) * p));
  return mode > n ? n : mode;
}

TruncatedSupport truncate_binomial(int n, double p, double eps_tail) {
  if (!(eps_tail > 0.0 && eps_tail < 1.0)) {
    throw std::domain_error("eps_tail must lie in (0, 1)");
  }
  const int mode = binomial_mode(n, p);
  TruncatedSupport s{mode, mode, binomial_pmf(n, p, mode)};
  double left = mode > 0 ? binomial_pmf(n, p, mode - 1) : -1.0;
  double right = mode < n ? binomial_pmf(n, p, mode + 1) : -1.0;
  while (s.covered_mass < 1.0 - eps_tail && (left >= 0.0 || right >= 0.0)) {
    if (left >= right) {
      s.covered_mass += left;
      --s.lo;
      left = s.lo > 0 ? binomial_pmf(n, p, s.lo - 1) : -1.0;
    } else {
      s.covered_mass += right;
      ++s.hi;
      right = s.hi < n ? binomial_pmf(n, p, s.hi + 1) : -1.0;
    }
  }
  if (s.covered_mass > 1.0) s.covered_mass = 1.0;
  return s;
}

}  // namespace

double binomial_pmf(int n, double p, int k) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  // Lanczos-based pdf: lgamma differences lose ~1e-10 relative at n ~ 1e5.
  return boost::math::pdf(boost::math::binomial_distribution<double>(n, p), k);
}

double activation_pmf(const ActivationLaw& law, int active) {
  if (active < 0 || active > law.devices) {
    throw std::domain_error("active device count " + std::to_string(active) +
                            " outside [0, " + std::to_string(law.devices) +
                            "]");
  }
  return binomial_pmf(law.devices, law.activation_prob, active);
}

double collision_pmf(const CollisionLaw& law, int colliders) {
  if (law.active < 1) {
    throw std::domain_error("collision law needs at least one active device");
  }
  if (law.pilots < 1) throw std::domain_error("pilot count must be positive");
  if (colliders < 0 || colliders > law.active - 1) {
    throw std::domain_error("collider count " + std::to_string(colliders) +
                            " outside [0, " + std::to_string(law.active - 1) +
                            "]");
  }
  return binomial_pmf(law.active - 1, 1.0 / law.pilots, colliders);
}

TruncatedSupport truncate_support(const ActivationLaw& law, double eps_tail) {
  return truncate_binomial(law.devices, law.activation_prob, eps_tail);
}

TruncatedSupport truncate_support(const CollisionLaw& law, double eps_tail) {
  if (law.active < 1) {
    throw std::domain_error("collision law needs at least one active device");
  }
  return truncate_binomial(law.active - 1, 1.0 / law.pilots, eps_tail);
}

std::vector<int> sample_active_set(const ActivationLaw& law, Rng& rng) {
  std::vector<int> active;
  active.reserve(static_cast<std::size_t>(law.mean() * 1.5) + 4);
  for (int k = 0; k < law.devices; ++k) {
    if (rng.bernoulli(law.activation_prob)) active.push_back(k);
  }
  return active;
}

}  // namespace rpda
