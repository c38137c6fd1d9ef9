// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#include <chrono>
#include <cmath>

#include "doctest.h"
#include "rpda/errors.hpp"
#include "rpda/optimizer.hpp"

using namespace rpda;

namespace {

double s0_residual(double x) { return std::log(1 + x) - 2 * x / (1 + x); }

template <class F>
double scan_argmax(F&& f, double lo, double hi, double step) {
  double best_x = lo, best = f(lo);
  for (double x = lo; x <= hi; x += step) {
    const double v = f(x);
    if (v > best) best = v, best_x = x;
  }
  return best_x;
}

}  // namespace

TEST_CASE("s0 solves its defining equation") {
  const auto t0 = std::chrono::steady_clock::now();
  const double s0 = solve_s0();
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(1));
  CHECK(std::abs(s0_residual(s0)) < 1e-10);
  CHECK(s0 == doctest::Approx(3.92).epsilon(0.01 / 3.92));
  // Sign-change scan with a 1e-6 step.
  double bracket = 0;
  for (double x = 3.5; x < 4.5; x += 1e-6) {
    if ((s0_residual(x) < 0) != (s0_residual(x + 1e-6) < 0)) {
      bracket = x;
      break;
    }
  }
  CHECK(s0 >= bracket - 1e-9);
  CHECK(s0 <= bracket + 1e-6 + 1e-9);
}

TEST_CASE("first heuristic") {
  const HeuristicPoint h = heuristic1(100, 100);
  CHECK(h.tau_p == 33);
  CHECK(h.p_aK == doctest::Approx(100 / std::sqrt(3 * solve_s0())).epsilon(1e-12));
  CHECK(h.p_aK == doctest::Approx(29.16).epsilon(0.005));
  CHECK(heuristic1(3, 57).tau_p == 1);
  CHECK(heuristic1(200, 200).p_aK == doctest::Approx(2 * h.p_aK));
  CHECK_THROWS_AS(heuristic1(2, 100), ConfigError);
}

TEST_CASE("first heuristic maximizes the simplified cost") {
  const OperatingPoint base{100, 800, 99, 33, 0};
  GridSpec grid;
  grid.tau_p_points = 98;
  grid.p_aK_points = 400;
  grid.p_aK_max = 100;
  grid.stages = 2;
  const OptimizationResult r = grid_opt(Cost::Rh0, base, UniformPowerError{10, 0}, grid, McConfig{});
  const HeuristicPoint h = heuristic1(99, 100);
  CHECK(r.tau_p_opt == h.tau_p);
  CHECK(r.p_aK_opt == doctest::Approx(h.p_aK).epsilon(1e-3));
}

TEST_CASE("second heuristic") {
  const LargeScaleModel fixed = UniformPowerError{10, 0};
  const HeuristicPoint h = heuristic2_1d(100, 100, fixed);
  const double scan = scan_argmax([](double b) { return b * std::log2(1 + 1 / (3 * b * b)); }, 0.01, 2, 1e-6);
  CHECK(h.b == doctest::Approx(scan).epsilon(1e-4));
  // Equal gains reduce the second heuristic to the first.
  CHECK(h.b == doctest::Approx(heuristic1(100, 100).b).epsilon(1e-4));

  const LargeScaleModel shadow = LogNormalShadowing{10, 2};
  CHECK(heuristic2_1d(100, 100, shadow).b == heuristic2_1d(300, 400, shadow).b);
  double prev = 0;
  for (double var : {0.0, 0.1, 0.25, 0.5}) {
    const double b = heuristic2_1d(100, 100, LogNormalShadowing{10, var}).b;
    CHECK(b > prev);
    prev = b;
  }
}

TEST_CASE("asymptotic one-dimensional method") {
  const LargeScaleModel fixed = UniformPowerError{10, 0};
  const HeuristicPoint h = asymptotic_1d(99, 99, fixed);
  CHECK(h.tau_p == 33);
  const double scan = scan_argmax([&](double b) { return asymptotic_1d_objective(b, 99, 99, fixed); }, 0.01, 3, 1e-5);
  CHECK(h.b == doctest::Approx(scan).epsilon(1e-3));
  // Same optimum as the large-system bound restricted to tau_p = tau_u / 3.
  const OperatingPoint base{99, 5000, 99, 33, 0};
  const double pk = scan_argmax([&](double p) { return ra(with_point(base, 33, p), fixed).value; }, 1, 150, 0.01);
  CHECK(h.p_aK == doctest::Approx(pk).epsilon(0.005));
  CHECK(asymptotic_1d_objective(1e-9, 99, 99, fixed) < 1e-6);
  CHECK(asymptotic_1d_objective(1e6, 99, 99, fixed) < 1e-3);
  // The pilot-collision and self terms push the optimum above the first heuristic.
  CHECK(h.p_aK > heuristic1(99, 99).p_aK);
}

TEST_CASE("scalar maximizers") {
  const auto f = [](double x) { return -(x - 2.5) * (x - 2.5); };
  CHECK(golden_section_max(f, 0, 10, 1e-9).x == doctest::Approx(2.5).epsilon(1e-7));
  CHECK(maximize_scalar(f, 0.01, 100, 1e-9).x == doctest::Approx(2.5).epsilon(1e-7));
  CHECK_THROWS(maximize_scalar(f, 0, 1));
}

TEST_CASE("grid edge cases") {
  const OperatingPoint base{100, 800, 100, 33, 0};
  const LargeScaleModel model = UniformPowerError{10, 0};
  GridSpec one;
  one.tau_p_min = one.tau_p_max = 20;
  one.p_aK_min = one.p_aK_max = 12.5;
  one.stages = 1;
  const OptimizationResult r = grid_opt(Cost::Ra, base, model, one, McConfig{});
  CHECK(r.tau_p_opt == 20);
  CHECK(r.p_aK_opt == 12.5);
  CHECK(r.rate == ra(with_point(base, 20, 12.5), model).value);

  GridSpec empty;
  empty.tau_p_points = 0;
  CHECK_THROWS_AS(grid_opt(Cost::Ra, base, model, empty, McConfig{}), ConfigError);
  GridSpec inverted;
  inverted.tau_p_min = 60;
  inverted.tau_p_max = 50;
  CHECK_THROWS_AS(grid_opt(Cost::Ra, base, model, inverted, McConfig{}), ConfigError);
}

TEST_CASE("large-system optimum is interior near a third of the slot") {
  const OperatingPoint base{400, 4000, 400, 133, 0};
  const OptimizationResult r = grid_opt(Cost::Ra, base, UniformPowerError{10, 0}, GridSpec{}, McConfig{});
  const double ratio = r.tau_p_opt / 400.0;
  CHECK(ratio >= 0.2);
  CHECK(ratio <= 0.5);
  CHECK(r.p_aK_opt > 1);
  CHECK(r.p_aK_opt < 4000);
}

TEST_CASE("R3 and Ra optima agree") {
  for (int tu : {100, 200}) {
    const OperatingPoint base{100, 800, tu, 33, 0};
    GridSpec grid;
    grid.p_aK_max = 200;
    const LargeScaleModel model = UniformPowerError{10, 0};
    const OptimizationResult a = grid_opt(Cost::Ra, base, model, grid, McConfig{});
    const OptimizationResult b = grid_opt(Cost::R3, base, model, grid, McConfig{});
    // One fine-grid cell: the refined tau_p step and the refined p_aK ratio.
    const double tau_cell = 2.0 * (tu - 1) / (grid.tau_p_points - 1);
    const double pk_cell = std::pow(200.0, 2.0 / (grid.p_aK_points - 1));
    CHECK(std::abs(a.tau_p_opt - b.tau_p_opt) <= tau_cell);
    CHECK(std::max(a.p_aK_opt, b.p_aK_opt) / std::min(a.p_aK_opt, b.p_aK_opt) <= pk_cell);
  }
}

TEST_CASE("method contracts") {
  const OperatingPoint base{100, 800, 100, 33, 0};
  const LargeScaleModel model = UniformDistance{10, 0.25};
  GridSpec grid;
  grid.tau_p_points = grid.p_aK_points = 8;
  grid.refine_tau_p_points = grid.refine_p_aK_points = 5;
  grid.p_aK_max = 200;
  const McConfig mc{100, kDefaultEpsTail, 3};

  reset_r1_evaluation_count();
  for (Method m : {Method::R3Opt, Method::RaOpt, Method::Ra1D, Method::Rh0, Method::Rh1D}) {
    const OptimizationResult r = optimize(m, base, model, grid, mc);
    CAPTURE(to_string(m));
    CHECK(r.method == m);
    CHECK(r.tau_p_opt >= 1);
    CHECK(r.tau_p_opt <= base.slot_length);
    CHECK(r.p_aK_opt > 0);
    CHECK(r.p_aK_opt <= base.devices);
    CHECK(r.rate >= 0);
  }
  CHECK(r1_evaluation_count() == 0);

  const OptimizationResult r1 = optimize(Method::R1Opt, base, model, grid, mc);
  CHECK(r1_evaluation_count() == r1.evaluations);
  const BetaBank bank(model, mc.n_beta_samples,
                      required_bank_depth(with_point(base, 1, 200), mc.eps_tail), mc.seed);
  CHECK(r1_bar(with_point(base, r1.tau_p_opt, r1.p_aK_opt), bank, mc.eps_tail, 1).value == r1.rate);

  const HeuristicPoint h = heuristic1(100, 100);
  const OptimizationResult ra_opt = optimize(Method::RaOpt, base, model, GridSpec{}, mc);
  CHECK(ra_opt.rate >= ra(with_point(base, h.tau_p, h.p_aK), model).value);

  for (Method m : {Method::R1Opt, Method::R3Opt, Method::RaOpt, Method::Ra1D, Method::Rh0, Method::Rh1D}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK_FALSE(parse_method("R2-opt").has_value());
}

TEST_CASE("optimization is independent of the worker count") {
  const OperatingPoint base{100, 800, 100, 33, 0};
  const LargeScaleModel model = UniformPowerError{10, 0.5};
  GridSpec grid;
  grid.tau_p_points = grid.p_aK_points = 6;
  grid.refine_tau_p_points = grid.refine_p_aK_points = 4;
  grid.p_aK_max = 100;
  const McConfig mc{64, kDefaultEpsTail, 5};
  const OptimizationResult a = grid_opt(Cost::R1, base, model, grid, mc, 1);
  const OptimizationResult b = grid_opt(Cost::R1, base, model, grid, mc, 4);
  CHECK(a.tau_p_opt == b.tau_p_opt);
  CHECK(a.p_aK_opt == b.p_aK_opt);
  CHECK(a.rate == b.rate);
  CHECK(a.mc_std_err == b.mc_std_err);
}
