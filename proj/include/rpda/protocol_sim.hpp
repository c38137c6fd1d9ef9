// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "rpda/bounds.hpp"
#include "rpda/channel_models.hpp"

namespace rpda {

class TraceWriter;

/// Pilot j is declared in use when ||y_j||^2 / M > 1 + zeta sqrt(2 / M).
struct DetectionThreshold {
  double zeta = 5.0;
  double level(int antennas) const;
};

/// Devices, hopping patterns and frame length known to both ends.
struct FramePlan {
  int n_slots = 1;
  int pilots = 1;
  std::uint64_t frame_seed = 0;
  std::vector<int> active_set;
  /// Device whose pattern device k follows; empty means its own.
  std::vector<int> pattern_source;

  int pilot(int device, int slot) const;
};

struct ProtocolConfig {
  OperatingPoint op;
  LargeScaleModel model = UniformPowerError{};
  int n_slots = 2000;
  DetectionThreshold threshold;
  double rho = 0.9;  // fraction of slots a pattern must match
  /// Multiplier on the large-scale gain the receiver assumes for a device.
  double beta_knowledge_error = 1.0;
  double data_power = 1.0;
  /// Test hooks: fixed active devices and gains, and a shared pattern.
  std::vector<int> forced_active;
  std::vector<double> forced_betas;
  bool shared_pattern = false;
};

struct SlotOutcome {
  std::vector<int> detected;             // pilot indices, ascending
  std::vector<double> est_sum_power;     // per detected pilot
  std::vector<double> mrc_output_power;  // per detected pilot
  std::vector<double> sinr;              // per active device (genie); 0 if missed
};

struct FrameReport {
  std::vector<int> active;
  std::vector<double> betas;
  std::vector<double> device_rate;  // empirical, per active device
  std::vector<int> identified;      // ascending device ids
  double sum_rate = 0.0;            // identified and truly active devices
  long missed_detections = 0;       // active device slots whose pilot was missed
  long false_alarms = 0;            // detected pilots with no transmitter
  double estimate_nmse = 0.0;       // of the receiver's channel estimates
};

struct FrameBatch {
  std::vector<FrameReport> frames;
  double mean_sum_rate = 0.0;
  double std_err = 0.0;  // across frames
};

FramePlan make_frame_plan(const ProtocolConfig& cfg, std::uint64_t frame_seed);

/// Y_p with column j = sqrt(tau_p) sum_{k on j} g_k + noise.
Eigen::MatrixXcd pilot_observation(const Eigen::MatrixXcd& gains,
                                   std::span<const int> pilots, int pilot_count,
                                   Rng& rng);

std::vector<int> detect_pilots(const Eigen::MatrixXcd& yp,
                               const DetectionThreshold& threshold);

/// max(0, (||y_j||^2 / M - 1) / tau_p).
double estimate_sum_power(const Eigen::MatrixXcd& yp, int pilot);

/// (sqrt(tau_p) / (tau_p beta_sum + 1)) y_j.
Eigen::VectorXcd estimate_channel(const Eigen::MatrixXcd& yp, int pilot,
                                  double beta_sum_estimate);

/// MMSE estimate of one device's channel given the true gains on its pilot.
Eigen::VectorXcd genie_mmse_estimate(const Eigen::MatrixXcd& yp, int pilot,
                                     double beta, double group_beta_sum);

/// SINR of device `device` behind combiner w, treating estimation error,
/// non-colliding users and noise as uncorrelated noise. Scale-invariant in w.
double genie_sinr(const Eigen::VectorXcd& w, const Eigen::MatrixXcd& yp,
                  int device, std::span<const double> betas,
                  std::span<const int> pilots, double data_power = 1.0);

struct MrcMeasurement {
  std::vector<double> sinr;          // per device
  std::vector<double> signal_power;  // per device, |w^H g_k x_k|^2
  std::vector<double> output_power;  // per combiner column, |w^H y_d|^2
};

/// Combines y_d = sqrt(data_power) sum g_k x_k + n with each pilot's
/// combiner column; a zero column yields zero SINR for devices on it.
MrcMeasurement mrc_and_measure(const Eigen::MatrixXcd& gains,
                               std::span<const double> betas,
                               std::span<const int> pilots,
                               const Eigen::MatrixXcd& yp,
                               const Eigen::MatrixXcd& combiners,
                               std::span<const std::complex<double>> symbols,
                               Rng& rng, double data_power = 1.0);

/// Devices whose pattern hits a detected pilot in at least rho * L slots.
std::vector<int> match_patterns(const std::vector<std::vector<int>>& detected,
                                const FramePlan& plan, int devices, double rho);

FrameReport run_frame(const ProtocolConfig& cfg, std::uint64_t frame_seed,
                      TraceWriter* trace = nullptr);

FrameBatch run_frames(const ProtocolConfig& cfg, int n_frames, std::uint64_t seed,
                      unsigned jobs = 0);

}  // namespace rpda
