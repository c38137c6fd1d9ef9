// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rpda/rng.hpp"

namespace rpda {

// Large-scale fading gain beta is a receive SNR relative to unit noise power,
// in linear units, fixed for a whole frame.

/// Imperfect power control: beta = delta_bar * (1 + v), v ~ U[-alpha, alpha].
struct UniformPowerError {
  double delta_bar = 10.0;
  double alpha = 0.0;  // in [0, 1]
};

/// Log-normal shadowing around a controlled median:
/// beta = delta_bar * 10^(v / 10), v ~ N(0, sigma_v2) with v in dB.
struct LogNormalShadowing {
  double delta_bar = 10.0;
  double sigma_v2 = 0.0;  // dB^2
};

/// Devices spread in distance around a nominal radius d0:
/// beta = delta_bar * (d / d0)^(-pathloss_exp), d = d0 * (1 + v),
/// v ~ U[-alpha, alpha].
struct UniformDistance {
  double delta_bar = 10.0;
  double alpha = 0.0;  // in [0, 1)
  double d0 = 500.0;
  double pathloss_exp = 3.76;
};

using LargeScaleModel =
    std::variant<UniformPowerError, LogNormalShadowing, UniformDistance>;

/// First, second and fourth raw moments of beta.
struct BetaMoments {
  double mean = 0.0;
  double mean_sq = 0.0;
  double mean_4th = 0.0;

  /// E[b^4] / (E[b]^2 E[b^2]); equals 1 when every device has the same gain.
  double spread_factor() const { return mean_4th / (mean * mean * mean_sq); }
};

/// Throws std::invalid_argument on out-of-range parameters.
void validate_model(const LargeScaleModel& model);

/// True when every draw equals delta_bar (zero spread).
bool is_deterministic(const LargeScaleModel& model);

std::string describe(const LargeScaleModel& model);

double sample_beta(const LargeScaleModel& model, Rng& rng);

/// E[beta^order] in closed form.
double raw_moment(const LargeScaleModel& model, int order);

BetaMoments analytic_moments(const LargeScaleModel& model);

/// E[f(beta)] by fixed composite Gauss-Legendre quadrature over the model's
/// underlying variable. Fixed nodes keep the result a smooth, deterministic
/// function of any parameters captured by f.
double expect_over_beta(const LargeScaleModel& model,
                        const std::function<double(double)>& f);

/// One slot of small-scale fading: column j is CN(0, betas[j] I_M).
struct ChannelRealization {
  Eigen::MatrixXcd gains;
  std::vector<double> betas;
};

ChannelRealization sample_channels(std::span<const double> betas, int antennas,
                                   Rng& rng);

}  // namespace rpda
