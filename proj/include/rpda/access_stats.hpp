// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "rpda/rng.hpp"

namespace rpda {

inline constexpr double kDefaultEpsTail = 1e-9;

/// K devices, each independently active in a frame with probability p.
struct ActivationLaw {
  int devices = 1;
  double activation_prob = 0.0;

  double mean() const { return activation_prob * devices; }
  double variance() const {
    return activation_prob * devices * (1.0 - activation_prob);
  }
};

/// Number of colliders of one reference device when `active` devices each
/// pick one of `pilots` sequences uniformly.
struct CollisionLaw {
  int active = 1;
  int pilots = 1;

  double mean() const {
    return static_cast<double>(active - 1) / static_cast<double>(pilots);
  }
};

/// Contiguous support [lo, hi] carrying `covered_mass` of a distribution.
struct TruncatedSupport {
  int lo = 0;
  int hi = 0;
  double covered_mass = 1.0;

  int size() const { return hi - lo + 1; }
};

/// Binomial(n, p) mass at k, evaluated in log space. Returns 0 outside
/// [0, n].
double binomial_pmf(int n, double p, int k);

/// P(K_a = active). Throws std::domain_error when active is outside [0, K].
double activation_pmf(const ActivationLaw& law, int active);

/// P(c colliders | K_a). Throws std::domain_error when K_a < 1 or c is
/// outside [0, K_a - 1].
double collision_pmf(const CollisionLaw& law, int colliders);

/// Smallest interval around the mode with mass >= 1 - eps_tail, grown
/// greedily towards the heavier neighbour (optimal for unimodal masses).
TruncatedSupport truncate_support(const ActivationLaw& law,
                                  double eps_tail = kDefaultEpsTail);
TruncatedSupport truncate_support(const CollisionLaw& law,
                                  double eps_tail = kDefaultEpsTail);

/// Indices of the devices active in one frame, in increasing order.
std::vector<int> sample_active_set(const ActivationLaw& law, Rng& rng);

}  // namespace rpda
