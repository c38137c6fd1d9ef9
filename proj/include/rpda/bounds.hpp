// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rpda/access_stats.hpp"
#include "rpda/channel_models.hpp"

namespace rpda {

/// Fully specified operating point of the random access scheme.
struct OperatingPoint {
  int antennas = 100;     // M
  int devices = 800;      // K
  int slot_length = 100;  // tau_u, symbols per slot
  int pilot_length = 33;  // tau_p, symbols (and orthogonal pilots) per slot
  double activation_prob = 0.0;

  double mean_active() const { return activation_prob * devices; }
};

/// Throws std::invalid_argument naming the offending field.
void validate(const OperatingPoint& op);

/// Reference device 0 together with the devices sharing its pilot.
struct CollisionScenario {
  double beta_ref = 1.0;
  std::vector<double> colliders;
  int active = 1;
  int pilot_length = 1;
  int antennas = 2;
};

/// The three additive parts of 1/SINR after MRC with the MMSE estimate.
struct SinrComponents {
  double pilot_contamination = 0.0;
  double estimation_error = 0.0;
  double residual_interference = 0.0;

  double inverse_sinr() const {
    return pilot_contamination + estimation_error + residual_interference;
  }
};

enum class BoundId { R1, R2, R3, Ra };
std::string_view to_string(BoundId id);

struct BoundResult {
  double value = 0.0;          // bits per symbol
  BoundId bound = BoundId::R1;
  long mc_samples = 0;         // 0 when evaluated without Monte Carlo
  double mc_std_err = 0.0;
};

struct McConfig {
  int n_beta_samples = 2000;
  double eps_tail = kDefaultEpsTail;
  std::uint64_t seed = 1;
};

/// Fraction of the slot left for data.
double prelog(int slot_length, int pilot_length);

double rate_from_sinr(double sinr, int slot_length, int pilot_length);

/// SINR lower bound of one device given its colliders and the gains of the
/// remaining active devices (others.size() == active - 1 - colliders).
/// Throws std::domain_error for fewer than two antennas.
double sinr1(const CollisionScenario& s, std::span<const double> others);

/// Same quantity assembled from the MMSE estimate and error variances;
/// 1 / inverse_sinr() equals sinr1().
SinrComponents sinr1_components(const CollisionScenario& s,
                                std::span<const double> others);

double rate1(const CollisionScenario& s, std::span<const double> others,
             int slot_length);

/// Common random numbers for the gain expectations.
///
/// Sample s holds a reference gain and a stream of further gains drawn from
/// the model with a substream seeded by (seed, s). Prefix sums of the stream
/// and of its squares make every (K_a, c) cell O(1) per sample: the first c
/// stream entries act as colliders and the next K_a - 1 - c as the other
/// active devices. A bank of larger depth extends, never changes, a
/// shallower one. Zero-spread models collapse to a single sample.
class BetaBank {
 public:
  BetaBank(const LargeScaleModel& model, int samples, int depth,
           std::uint64_t seed);

  int samples() const { return samples_; }
  int depth() const { return depth_; }
  const LargeScaleModel& model() const { return model_; }

  double reference(int s) const { return reference_[static_cast<std::size_t>(s)]; }

  /// Sum of the first n stream gains of sample s.
  double prefix_sum(int s, int n) const { return sums_[index(s, n)]; }
  double prefix_sum_sq(int s, int n) const { return sums_sq_[index(s, n)]; }

 private:
  std::size_t index(int s, int n) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(depth_ + 1) +
           static_cast<std::size_t>(n);
  }

  LargeScaleModel model_;
  int samples_;
  int depth_;
  std::vector<double> reference_;
  std::vector<double> sums_;
  std::vector<double> sums_sq_;
};

/// Stream depth a bank needs to evaluate R1/R2 at this operating point.
int required_bank_depth(const OperatingPoint& op, double eps_tail);

/// Main sum-rate bound averaged over activity, collisions and gains.
BoundResult r1_bar(const OperatingPoint& op, const LargeScaleModel& model,
                   const McConfig& mc);
/// Same, reusing a prebuilt bank (common random numbers across calls).
BoundResult r1_bar(const OperatingPoint& op, const BetaBank& bank,
                   double eps_tail, unsigned jobs = 0);

/// Conditional contribution K_a * sum_c p(c|K_a) E[rate1] for a fixed
/// number of active devices.
BoundResult r1_given_active(const OperatingPoint& op, const BetaBank& bank,
                            int active, double eps_tail);

/// Rate of a device with gain beta_ref, averaged over activity and
/// collisions: (1/K) sum p(K_a) K_a sum_c p(c|K_a) E[rate1].
BoundResult per_device_rate(const OperatingPoint& op,
                            const LargeScaleModel& model, double beta_ref,
                            const McConfig& mc);

/// SINR after averaging the interference denominator over collider and
/// interferer gains.
double sinr2(int colliders, int active, double beta_ref,
             const BetaMoments& moments, int pilot_length, int antennas);

BoundResult r2_bar(const OperatingPoint& op, const LargeScaleModel& model,
                   const McConfig& mc);
BoundResult r2_bar(const OperatingPoint& op, const BetaBank& bank,
                   double eps_tail, unsigned jobs = 0);

/// SINR after also averaging over the collider and active-device counts.
/// Requires p_a K >= 1.
double sinr3(double beta_ref, const BetaMoments& moments, int pilot_length,
             double activation_prob, int devices, int antennas);

BoundResult r3(const OperatingPoint& op, const LargeScaleModel& model);

/// Large-system SINR; only p_a K enters.
double sinra(double beta_ref, const BetaMoments& moments, int pilot_length,
             double mean_active, int antennas);

/// 1/sinra split into pilot-collision interference and the two residual
/// multi-user terms left after MRC.
struct SinraTerms {
  double pilot_collision = 0.0;
  double residual_users = 0.0;
  double residual_self = 0.0;

  double inverse_sinr() const {
    return pilot_collision + residual_users + residual_self;
  }
};
SinraTerms sinra_terms(double beta_ref, const BetaMoments& moments,
                       int pilot_length, double mean_active, int antennas);

BoundResult ra(const OperatingPoint& op, const LargeScaleModel& model);

/// Number of R1 evaluations since start or the last reset.
long r1_evaluation_count();
void reset_r1_evaluation_count();

}  // namespace rpda
