// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rpda/channel_models.hpp"
#include "rpda/optimizer.hpp"

namespace rpda {

enum class ScalingCase { Case1, Case2, Case3, Case4 };

std::string_view to_string(ScalingCase c);
std::optional<ScalingCase> parse_scaling_case(std::string_view name);

struct ScalingRegime {
  ScalingCase which = ScalingCase::Case3;
  double delta = 1.0;  // M / tau_u, or M / tau_p_max for Case 4
};

struct ScalingPrediction {
  double tau_p = 0.0;
  double p_aK = 0.0;
  /// Case 2 only: the optimum of (1 - tau_p/tau_u)(1 - sqrt(M/tau_p)),
  /// tau_p = (M/4)^(1/3) tau_u^(2/3), and the matching load.
  double tau_p_alt = 0.0;
  double p_aK_alt = 0.0;
  double rate = 0.0;
  /// Case 2 only: the rate with the extra 1/log(2) factor, M / ln 2.
  double rate_alt = 0.0;
  double sinr = 0.0;
  /// Magnitude of the leading neglected term of the rate.
  double rate_remainder = 0.0;
  std::string warning;  // set when (M, tau_u) sit outside the declared case
};

/// sqrt(E[b^4] / (E[b]^2 E[b^2])); 1 under perfect power control.
double moment_factor(const BetaMoments& m);

/// For Case 4, tau_u is read as tau_p_max and the rate excludes the
/// (tau_u - tau_p) / tau_u factor.
ScalingPrediction predict(ScalingCase which, double tau_u, double antennas,
                          const LargeScaleModel& model);

/// (1 - a) b E[log2(1 + a b0^2 d / (b m2 d^1.5 + b^2 m1^2 d + a b m1 b0 d^0.5))]
/// with d = M / tau_u, tau_p = a tau_u and p_aK = b sqrt(M tau_u).
double ab_objective(double a, double b, double delta, const LargeScaleModel& model);

struct AbSolution {
  double a = 0.0;
  double b = 0.0;
  double rate_scale = 0.0;  // objective at (a, b); R = rate_scale sqrt(M tau_u)
  double b_max = 0.0;
};

AbSolution solve_ab(double delta, const LargeScaleModel& model);

/// b E[log2(1 + b0^2 d / (b m2 d^1.5 + b^2 m1^2 d + b m1 b0 d^0.5))], d = M / tau_p_max.
double case4_objective(double b, double delta_p, const LargeScaleModel& model);

struct Case4Solution {
  double p_aK = 0.0;
  /// p_aK E[log2(1 + SINR)], i.e. the sum rate before the (tau_u - tau_p)/tau_u factor.
  double rate = 0.0;
  double b = 0.0;
  bool closed_form = false;
};

/// Optimal load with tau_p pinned at tau_p_max. The closed form is used when
/// M / tau_p_max is >= 100 or <= 0.01 unless `closed_form` overrides it.
Case4Solution solve_case4(double antennas, double tau_p_max,
                          const LargeScaleModel& model,
                          std::optional<bool> closed_form = std::nullopt);

struct LadderRung {
  int antennas = 0;
  int slot_length = 0;
};

struct LadderPoint {
  LadderRung rung;
  ScalingPrediction prediction;
  OptimizationResult optimum;
  double err_tau_p = 0.0;  // |tau_p^o / tau_p_pred - 1|
  double err_p_aK = 0.0;
  double err_rate = 0.0;
  double err_rate_alt = 0.0;   // Case 2 only
  double err_tau_p_alt = 0.0;  // Case 2 only
  double signed_err_rate = 0.0;
  double signed_err_rate_alt = 0.0;
};

struct ScalingReport {
  ScalingCase which = ScalingCase::Case3;
  std::vector<LadderPoint> points;
  bool tau_p_converging = false;  // errors non-increasing along the ladder
  bool rate_converging = false;
  /// Case 2: "M" or "M/ln2", the normalization the optimized rates approach
  /// from one side with shrinking error; "neither" if both fail.
  std::string supported_normalization;
};

ScalingReport verify_scaling(ScalingCase which, const LargeScaleModel& model,
                             const std::vector<LadderRung>& ladder,
                             unsigned jobs = 0);

}  // namespace rpda
