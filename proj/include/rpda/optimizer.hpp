// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "rpda/bounds.hpp"
#include "rpda/channel_models.hpp"

namespace rpda {

enum class Method { R1Opt, R3Opt, RaOpt, Ra1D, Rh0, Rh1D };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

/// Cost functions a grid search can maximize.
enum class Cost { R1, R3, Ra, Rh0 };

std::string_view to_string(Cost c);

/// Coarse-to-fine (tau_p, p_aK) search grid. Zero bounds mean "use the
/// natural limit": tau_p up to slot_length - 1, p_aK up to devices.
struct GridSpec {
  int tau_p_points = 25;
  int p_aK_points = 25;
  int refine_tau_p_points = 15;
  int refine_p_aK_points = 15;
  int stages = 2;
  int tau_p_min = 1;
  int tau_p_max = 0;
  double p_aK_min = 1.0;
  double p_aK_max = 0.0;
  bool log_tau_p = false;
};

struct OptimizationResult {
  int tau_p_opt = 0;
  double p_aK_opt = 0.0;
  double rate = 0.0;  // the method's own cost at the optimum
  double mc_std_err = 0.0;
  Method method = Method::R1Opt;
  long evaluations = 0;
  std::string diagnostics;
};

struct HeuristicConstants {
  double s0 = 0.0;
  double b_opt = 0.0;
};

struct HeuristicPoint {
  int tau_p = 0;
  double p_aK = 0.0;
  double b = 0.0;  // p_aK / sqrt(M tau_u)
};

/// Positive root of log(1 + x) = 2x / (1 + x).
double solve_s0();

HeuristicPoint heuristic1(int slot_length, int antennas);

/// b E[log2(1 + beta0^2 / (3 mean^2 b^2))].
double heuristic2_objective(double b, const LargeScaleModel& model);
HeuristicPoint heuristic2_1d(int slot_length, int antennas,
                             const LargeScaleModel& model);

/// Asymptotic rate with tau_p = tau_u / 3 and p_aK = b sqrt(M tau_u),
/// up to the constant factor (2/3) sqrt(M tau_u).
double asymptotic_1d_objective(double b, int slot_length, int antennas,
                               const LargeScaleModel& model);
HeuristicPoint asymptotic_1d(int slot_length, int antennas,
                             const LargeScaleModel& model);

/// Modified cost keeping only the p_aK^2 interference term.
double rh0(const OperatingPoint& op);
/// Same with the beta statistics of the model kept.
double rh_1d(const OperatingPoint& op, const LargeScaleModel& model);

struct ScalarMax {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search for a unimodal maximum on [lo, hi].
ScalarMax golden_section_max(const std::function<double(double)>& f, double lo,
                             double hi, double rel_tol = 1e-4,
                             int max_iter = 300);

/// Log-spaced scan on [lo, hi] followed by golden-section refinement around
/// the best scan point; robust when unimodality is only approximate.
ScalarMax maximize_scalar(const std::function<double(double)>& f, double lo,
                          double hi, double rel_tol = 1e-4, int scan_points = 48);

/// Operating point with the given pilot length and mean active count.
OperatingPoint with_point(const OperatingPoint& base, int tau_p, double p_aK);

OptimizationResult grid_opt(Cost cost, const OperatingPoint& base,
                            const LargeScaleModel& model, const GridSpec& grid,
                            const McConfig& mc, unsigned jobs = 0);

OptimizationResult optimize(Method method, const OperatingPoint& base,
                            const LargeScaleModel& model, const GridSpec& grid,
                            const McConfig& mc, unsigned jobs = 0);

}  // namespace rpda
