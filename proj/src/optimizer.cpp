// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#include "rpda/optimizer.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <map>
#include <utility>
#include <vector>

#include "rpda/errors.hpp"
#include "rpda/parallel.hpp"

namespace rpda {
namespace {

constexpr double kInvPhi = 0.6180339887498949;

std::vector<int> int_axis(int lo, int hi, int n, bool log_spaced) {
  std::vector<int> out;
  if (n <= 1 || lo == hi) {
    out.push_back(n <= 1 ? (lo + hi) / 2 : lo);
    return out;
  }
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    const double v = log_spaced ? lo * std::pow(static_cast<double>(hi) / lo, t)
                                : lo + t * (hi - lo);
    out.push_back(std::clamp(static_cast<int>(std::lround(v)), lo, hi));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> log_axis(double lo, double hi, int n) {
  std::vector<double> out;
  if (n <= 1 || lo == hi) {
    out.push_back(n <= 1 ? std::sqrt(lo * hi) : lo);
    return out;
  }
  for (int i = 0; i < n; ++i) {
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  }
  return out;
}

struct PointValue {
  double value = 0.0;
  double std_err = 0.0;
};

using PointKey = std::pair<int, double>;

std::string format_diag(const char* fmt, double a, double b, double c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

int third_of(int slot_length) {
  return std::max(1, static_cast<int>(std::lround(slot_length / 3.0)));
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::R1Opt: return "R1-opt";
    case Method::R3Opt: return "R3-opt";
    case Method::RaOpt: return "Ra-opt";
    case Method::Ra1D: return "Ra-1D";
    case Method::Rh0: return "Rh0";
    case Method::Rh1D: return "Rh-1D";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::R1Opt, Method::R3Opt, Method::RaOpt, Method::Ra1D,
                   Method::Rh0, Method::Rh1D}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view to_string(Cost c) {
  switch (c) {
    case Cost::R1: return "R1";
    case Cost::R3: return "R3";
    case Cost::Ra: return "Ra";
    case Cost::Rh0: return "Rh0";
  }
  return "?";
}

double solve_s0() {
  const auto h = [](double x) { return std::log1p(x) - 2.0 * x / (1.0 + x); };
  std::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      h, 1.0, 10.0, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (lo + hi);
}

HeuristicPoint heuristic1(int slot_length, int antennas) {
  if (slot_length < 3) throw ConfigError("tau_u", "heuristic needs tau_u >= 3");
  const double root = std::sqrt(static_cast<double>(slot_length) * antennas);
  const double b = 1.0 / std::sqrt(3.0 * solve_s0());
  return {third_of(slot_length), b * root, b};
}

double heuristic2_objective(double b, const LargeScaleModel& model) {
  const BetaMoments mom = analytic_moments(model);
  const double scale = 3.0 * mom.mean * mom.mean * b * b;
  return b * expect_over_beta(model, [&](double b0) {
           return std::log2(1.0 + b0 * b0 / scale);
         });
}

HeuristicPoint heuristic2_1d(int slot_length, int antennas,
                             const LargeScaleModel& model) {
  if (slot_length < 3) throw ConfigError("tau_u", "heuristic needs tau_u >= 3");
  const ScalarMax best = maximize_scalar(
      [&](double b) { return heuristic2_objective(b, model); }, 1e-3, 10.0);
  const double root = std::sqrt(static_cast<double>(slot_length) * antennas);
  return {third_of(slot_length), best.x * root, best.x};
}

double asymptotic_1d_objective(double b, int slot_length, int antennas,
                               const LargeScaleModel& model) {
  const BetaMoments mom = analytic_moments(model);
  const double m = antennas;
  const double tu = slot_length;
  const double root = std::sqrt(m * tu);
  return b * expect_over_beta(model, [&](double b0) {
           const double den = b * mom.mean_sq * m + b * b * mom.mean * mom.mean * root +
                              b * mom.mean * b0 * tu / 3.0;
           return std::log2(1.0 + root * b0 * b0 / 3.0 / den);
         });
}

HeuristicPoint asymptotic_1d(int slot_length, int antennas,
                             const LargeScaleModel& model) {
  if (slot_length < 3) throw ConfigError("tau_u", "heuristic needs tau_u >= 3");
  const ScalarMax best = maximize_scalar(
      [&](double b) {
        return asymptotic_1d_objective(b, slot_length, antennas, model);
      },
      1e-3, 10.0);
  const double root = std::sqrt(static_cast<double>(slot_length) * antennas);
  return {third_of(slot_length), best.x * root, best.x};
}

double rh0(const OperatingPoint& op) {
  validate(op);
  const double p = op.mean_active();
  if (p <= 0.0) return 0.0;
  return p * prelog(op.slot_length, op.pilot_length) *
         std::log2(1.0 + op.antennas * static_cast<double>(op.pilot_length) / (p * p));
}

double rh_1d(const OperatingPoint& op, const LargeScaleModel& model) {
  validate(op);
  const double p = op.mean_active();
  if (p <= 0.0) return 0.0;
  const BetaMoments mom = analytic_moments(model);
  const double gain = op.antennas * static_cast<double>(op.pilot_length) /
                      (mom.mean * mom.mean * p * p);
  return p * prelog(op.slot_length, op.pilot_length) *
         expect_over_beta(model, [&](double b0) {
           return std::log2(1.0 + gain * b0 * b0);
         });
}

ScalarMax golden_section_max(const std::function<double(double)>& f, double lo,
                             double hi, double rel_tol, int max_iter) {
  if (!(lo <= hi)) throw std::invalid_argument("golden section: lo > hi");
  ScalarMax out;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  out.evaluations = 2;
  for (int it = 0; it < max_iter; ++it) {
    if (b - a <= rel_tol * std::max(std::abs(c), std::abs(d)) || b - a <= 1e-300) break;
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
    ++out.evaluations;
  }
  if (fc >= fd) {
    out.x = c;
    out.value = fc;
  } else {
    out.x = d;
    out.value = fd;
  }
  return out;
}

ScalarMax maximize_scalar(const std::function<double(double)>& f, double lo,
                          double hi, double rel_tol, int scan_points) {
  if (!(lo > 0.0 && lo < hi)) throw std::invalid_argument("maximize_scalar: need 0 < lo < hi");
  const std::vector<double> xs = log_axis(lo, hi, std::max(3, scan_points));
  std::size_t best = 0;
  std::vector<double> fs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    fs[i] = f(xs[i]);
    if (fs[i] > fs[best]) best = i;
  }
  const double a = xs[best == 0 ? 0 : best - 1];
  const double b = xs[std::min(best + 1, xs.size() - 1)];
  ScalarMax out = golden_section_max(f, a, b, rel_tol);
  out.evaluations += static_cast<int>(xs.size());
  if (fs[best] > out.value) {
    out.x = xs[best];
    out.value = fs[best];
  }
  return out;
}

OperatingPoint with_point(const OperatingPoint& base, int tau_p, double p_aK) {
  OperatingPoint op = base;
  op.pilot_length = tau_p;
  op.activation_prob = std::clamp(p_aK / base.devices, 0.0, 1.0);
  return op;
}

OptimizationResult grid_opt(Cost cost, const OperatingPoint& base,
                            const LargeScaleModel& model, const GridSpec& grid,
                            const McConfig& mc, unsigned jobs) {
  const int tu = base.slot_length;
  const int tp_lo = std::max(1, grid.tau_p_min);
  const int tp_hi = grid.tau_p_max > 0 ? std::min(grid.tau_p_max, tu) : std::max(1, tu - 1);
  const double pk_lo = grid.p_aK_min;
  const double pk_hi = grid.p_aK_max > 0.0 ? std::min(grid.p_aK_max, static_cast<double>(base.devices))
                                           : static_cast<double>(base.devices);
  if (grid.tau_p_points < 1 || grid.p_aK_points < 1 || grid.stages < 1) {
    throw ConfigError("grid", "empty search grid");
  }
  if (tp_lo > tp_hi) throw ConfigError("grid.tau_p", "empty pilot-length range");
  if (!(pk_lo > 0.0 && pk_lo <= pk_hi)) throw ConfigError("grid.p_aK", "empty p_aK range");

  std::optional<BetaBank> bank;
  if (cost == Cost::R1) {
    const OperatingPoint deepest = with_point(base, tp_lo, pk_hi);
    bank.emplace(model, mc.n_beta_samples, required_bank_depth(deepest, mc.eps_tail), mc.seed);
  }
  auto evaluate = [&](int tp, double pk) -> PointValue {
    const OperatingPoint op = with_point(base, tp, pk);
    switch (cost) {
      case Cost::R1: {
        const BoundResult r = r1_bar(op, *bank, mc.eps_tail, 1);
        return {r.value, r.mc_std_err};
      }
      case Cost::R3: return {r3(op, model).value, 0.0};
      case Cost::Ra: return {ra(op, model).value, 0.0};
      case Cost::Rh0: return {rh0(op), 0.0};
    }
    return {};
  };

  std::map<PointKey, PointValue> cache;
  std::vector<int> tps = int_axis(tp_lo, tp_hi, grid.tau_p_points, grid.log_tau_p);
  std::vector<double> pks = log_axis(pk_lo, pk_hi, grid.p_aK_points);
  for (int stage = 0; stage < grid.stages; ++stage) {
    std::vector<PointKey> fresh;
    for (int tp : tps) {
      for (double pk : pks) {
        const PointKey key{tp, pk};
        if (!cache.count(key)) fresh.push_back(key);
      }
    }
    std::vector<PointValue> values(fresh.size());
    parallel_for(
        fresh.size(),
        [&](std::size_t i) { values[i] = evaluate(fresh[i].first, fresh[i].second); },
        jobs);
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      if (!std::isfinite(values[i].value)) {
        throw NumericError("non-finite cost at tau_p=" + std::to_string(fresh[i].first));
      }
      cache.emplace(fresh[i], values[i]);
    }
    if (stage + 1 == grid.stages) break;

    // Refine around the best point of the current axes.
    std::size_t bi = 0;
    std::size_t bj = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < tps.size(); ++i) {
      for (std::size_t j = 0; j < pks.size(); ++j) {
        const double v = cache.at({tps[i], pks[j]}).value;
        if (v > best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    const int t0 = tps[bi == 0 ? 0 : bi - 1];
    const int t1 = tps[std::min(bi + 1, tps.size() - 1)];
    const double p0 = pks[bj == 0 ? 0 : bj - 1];
    const double p1 = pks[std::min(bj + 1, pks.size() - 1)];
    tps = int_axis(t0, t1, std::min(grid.refine_tau_p_points, t1 - t0 + 1), false);
    pks = log_axis(p0, p1, grid.refine_p_aK_points);
  }

  OptimizationResult out;
  double best = -1.0;
  for (const auto& [key, val] : cache) {
    if (val.value > best) {
      best = val.value;
      out.tau_p_opt = key.first;
      out.p_aK_opt = key.second;
      out.rate = val.value;
      out.mc_std_err = val.std_err;
    }
  }
  const PointValue again = evaluate(out.tau_p_opt, out.p_aK_opt);
  if (again.value != out.rate) throw NumericError("grid optimum not reproducible");
  out.evaluations = static_cast<long>(cache.size()) + 1;
  out.method = cost == Cost::R1 ? Method::R1Opt : cost == Cost::R3 ? Method::R3Opt
             : cost == Cost::Ra ? Method::RaOpt : Method::Rh0;
  out.diagnostics = "cost=" + std::string(to_string(cost)) +
                    " stages=" + std::to_string(grid.stages) +
                    " points=" + std::to_string(cache.size()) +
                    format_diag(" tau_p=[%g,%g] p_aK_max=%g", tp_lo, tp_hi, pk_hi);
  return out;
}

OptimizationResult optimize(Method method, const OperatingPoint& base,
                            const LargeScaleModel& model, const GridSpec& grid,
                            const McConfig& mc, unsigned jobs) {
  auto from_heuristic = [&](const HeuristicPoint& h, auto&& cost) {
    OptimizationResult out;
    out.method = method;
    out.tau_p_opt = std::clamp(h.tau_p, 1, base.slot_length);
    out.p_aK_opt = std::min(h.p_aK, static_cast<double>(base.devices));
    out.rate = cost(with_point(base, out.tau_p_opt, out.p_aK_opt));
    out.evaluations = 1;
    out.diagnostics = format_diag("b=%.9g b_used=%.9g sqrt(M tau_u)=%.9g", h.b,
                                  out.p_aK_opt / std::sqrt(static_cast<double>(base.antennas) * base.slot_length),
                                  std::sqrt(static_cast<double>(base.antennas) * base.slot_length));
    return out;
  };
  switch (method) {
    case Method::R1Opt: return grid_opt(Cost::R1, base, model, grid, mc, jobs);
    case Method::R3Opt: {
      OptimizationResult r = grid_opt(Cost::R3, base, model, grid, mc, jobs);
      r.method = method;
      return r;
    }
    case Method::RaOpt: return grid_opt(Cost::Ra, base, model, grid, mc, jobs);
    case Method::Ra1D:
      return from_heuristic(asymptotic_1d(base.slot_length, base.antennas, model),
                            [&](const OperatingPoint& op) { return ra(op, model).value; });
    case Method::Rh0:
      return from_heuristic(heuristic1(base.slot_length, base.antennas),
                            [](const OperatingPoint& op) { return rh0(op); });
    case Method::Rh1D:
      return from_heuristic(heuristic2_1d(base.slot_length, base.antennas, model),
                            [&](const OperatingPoint& op) { return rh_1d(op, model); });
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace rpda
