// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rpda/bounds.hpp"
#include "rpda/channel_models.hpp"
#include "rpda/optimizer.hpp"
#include "rpda/scaling_laws.hpp"

namespace rpda {

enum class ExperimentKind { BoundEval, Optimize, Sweep, ScalingVerify, Simulate, Compare };

std::string_view to_string(ExperimentKind k);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view name);

struct SystemConfig {
  int antennas = 100;
  int devices = 800;
  int slot_length = 100;
  std::optional<int> pilot_length;
  std::optional<double> activation_prob;
  LargeScaleModel model = UniformPowerError{};
  std::uint64_t seed = 1;
  McConfig mc;

  /// Operating point with the given (or placeholder) pilot length and load.
  OperatingPoint operating_point() const;
};

struct SweepSpec {
  std::string axis;  // tau_u, M, K, alpha, sigma_v2, delta_bar
  std::vector<double> values;
};

struct SimulationSpec {
  int n_slots = 2000;
  int n_frames = 4;
  double zeta = 5.0;
  double rho = 0.9;
  double beta_knowledge_error = 1.0;
  bool trace = false;
};

struct ScalingSpec {
  ScalingCase which = ScalingCase::Case3;
  std::vector<LadderRung> ladder;
  std::vector<double> deltas;  // solve_ab curve points
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::BoundEval;
  SystemConfig system;
  std::vector<Method> methods;
  std::vector<BoundId> bounds{BoundId::R1, BoundId::R2, BoundId::R3, BoundId::Ra};
  std::optional<SweepSpec> sweep;
  GridSpec grid;
  ScalingSpec scaling;
  SimulationSpec simulation;
  std::string output_dir = "out";
};

struct Diagnostic {
  std::string field;
  std::string message;
};

/// Malformed config text; line and column are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& what)
      : std::runtime_error(what), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Parses JSON text. Syntax errors throw ParseError; type and key problems
/// are appended to `diags` and leave the affected field at its default.
ExperimentSpec parse_spec(std::string_view text, std::vector<Diagnostic>& diags);

/// Pure validation; an empty list means the spec is runnable.
std::vector<Diagnostic> validate(const ExperimentSpec& spec);

/// Applies one sweep value to a copy of the system.
SystemConfig apply_axis(const SystemConfig& base, const std::string& axis, double value);

/// Runs the experiment and returns the written file paths.
std::vector<std::string> run(const ExperimentSpec& spec, std::ostream* log = nullptr);

enum ExitCode { kExitOk = 0, kExitParse = 2, kExitInvalid = 3, kExitNumeric = 4 };

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  unsigned jobs = 0;
};

/// File-level entry points used by the command-line tool.
int run_file(const std::string& path, const RunOptions& opts, std::ostream& out,
             std::ostream& err);
int validate_file(const std::string& path, std::ostream& out, std::ostream& err);

}  // namespace rpda
