// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace rpda {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent substream seed from a root seed and up to three
/// counters. Used for per-sample, per-frame and per-slot streams so results
/// never depend on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a,
                                    std::uint64_t b = 0,
                                    std::uint64_t c = 0) noexcept {
  std::uint64_t h = mix64(root);
  h = mix64(h ^ a);
  h = mix64(h ^ (b + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ (c + 0x8cb92ba72f3d8dd7ULL));
  return h;
}

/// Maps a 64-bit word uniformly onto [0, n).
constexpr std::uint32_t bounded(std::uint64_t word, std::uint32_t n) noexcept {
  // floor(word * n / 2^64) without a 128-bit type.
  const std::uint64_t hi = (word >> 32) * n;
  const std::uint64_t lo = ((word & 0xffffffffULL) * n) >> 32;
  return static_cast<std::uint32_t>((hi + lo) >> 32);
}

/// Random stream used throughout the simulator.
///
/// The engine is the standard-specified mt19937_64; the variate transforms
/// are implemented here rather than taken from <random> distributions, whose
/// algorithms are implementation-defined. This keeps traces and CSV output
/// byte-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance = 1.0);

  std::uint32_t below(std::uint32_t n) { return bounded(engine_(), n); }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace rpda
