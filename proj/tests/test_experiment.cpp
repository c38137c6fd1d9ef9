// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "rpda/errors.hpp"
#include "rpda/experiment.hpp"

using namespace rpda;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rpda_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_spec(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "spec.json";
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool mentions(const std::vector<Diagnostic>& d, const std::string& field) {
  return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.field == field; });
}

ExperimentSpec parse_ok(const std::string& text) {
  std::vector<Diagnostic> diags;
  ExperimentSpec spec = parse_spec(text, diags);
  REQUIRE(diags.empty());
  return spec;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(RPDA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kValid = R"({
  "kind": "bound-eval",
  "system": {"antennas": 100, "devices": 800, "slot_length": 100, "pilot_length": 33, "p_aK": 30},
  "model": {"type": "model1", "delta_bar": 10, "alpha": 0.5},
  "monte_carlo": {"n_beta_samples": 50}
})";

}  // namespace

TEST_CASE("a valid spec parses without diagnostics") {
  const ExperimentSpec spec = parse_ok(kValid);
  CHECK(spec.kind == ExperimentKind::BoundEval);
  CHECK(spec.system.pilot_length == 33);
  CHECK(*spec.system.activation_prob == doctest::Approx(30.0 / 800));
  CHECK(std::get<UniformPowerError>(spec.system.model).alpha == 0.5);
  CHECK(spec.system.mc.n_beta_samples == 50);
  CHECK(validate(spec).empty());
}

TEST_CASE("defaults follow the reference configuration") {
  const ExperimentSpec spec = parse_ok(R"({"kind": "optimize", "methods": ["Ra-opt"]})");
  CHECK(spec.system.devices == 800);
  CHECK(std::get<UniformPowerError>(spec.system.model).delta_bar == 10);
  CHECK(validate(spec).empty());
}

TEST_CASE("syntax errors carry a position") {
  std::vector<Diagnostic> diags;
  try {
    parse_spec("{\n  \"kind\": \"sweep\",\n  \"seed\": ,\n}", diags);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() > 1);
  }
}

TEST_CASE("unknown keys and wrong types are reported by field") {
  std::vector<Diagnostic> diags;
  parse_spec(R"({"kind": "bound-eval", "system": {"antenas": 4, "devices": "many"}})", diags);
  CHECK(mentions(diags, "system.antenas"));
  CHECK(mentions(diags, "system.devices"));
  diags.clear();
  parse_spec(R"({"kind": "bound-eval", "methods": ["R9-opt"], "model": {"type": "model7"}})", diags);
  CHECK(diags.size() >= 2);
}

TEST_CASE("invariant violations name their fields") {
  ExperimentSpec spec = parse_ok(kValid);
  spec.system.pilot_length = 120;
  const auto d1 = validate(spec);
  REQUIRE(mentions(d1, "system.pilot_length"));
  CHECK(d1.front().message.find("slot_length") != std::string::npos);

  spec = parse_ok(kValid);
  spec.system.activation_prob = 1.5;
  CHECK(mentions(validate(spec), "system.activation_prob"));

  spec = parse_ok(R"({"kind": "sweep", "methods": ["Ra-opt"], "sweep": {"axis": "tau_u", "values": []}})");
  CHECK(mentions(validate(spec), "sweep.values"));

  spec = parse_ok(R"({"kind": "optimize"})");
  CHECK(mentions(validate(spec), "methods"));
}

TEST_CASE("sweep axes rewrite the system") {
  SystemConfig base;
  base.activation_prob = 0.05;
  CHECK(apply_axis(base, "tau_u", 120).slot_length == 120);
  CHECK(apply_axis(base, "M", 64).antennas == 64);
  const SystemConfig k = apply_axis(base, "K", 1600);
  CHECK(k.devices == 1600);
  CHECK(*k.activation_prob * 1600 == doctest::Approx(0.05 * 800));
  CHECK(std::get<UniformPowerError>(apply_axis(base, "alpha", 0.3).model).alpha == 0.3);
  CHECK_THROWS_AS(apply_axis(base, "sigma_v2", 0.3), ConfigError);
  CHECK_THROWS_AS(apply_axis(base, "beta", 1), ConfigError);
}

TEST_CASE("bound evaluation writes a non-negative CSV") {
  const fs::path dir = scratch_dir("bounds");
  ExperimentSpec spec = parse_ok(kValid);
  spec.output_dir = dir.string();
  const auto files = run(spec);
  REQUIRE(files.size() == 1);
  std::ifstream in(files.front());
  std::string line;
  std::getline(in, line);
  CHECK(line == "tau_u,bound,rate,tau_p,p_aK,mc_std_err,mc_samples");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    std::getline(ss, cell, ',');
    CHECK(std::stod(cell) >= 0);
  }
  CHECK(rows == 4);
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch_dir("cli");
  const std::string out = " --out " + (dir / "out").string();
  CHECK(cli("validate " + write_spec(dir, kValid).string()) == 0);
  CHECK(cli("validate " + (dir / "missing.json").string()) == 2);
  CHECK(cli("validate " + write_spec(dir, "{ \"kind\": ").string()) == 2);
  CHECK(cli("run " + write_spec(dir, R"({"kind": "bound-eval", "system": {"pilot_length": 200, "activation_prob": 0.1}})").string() + out) == 3);
  CHECK(cli("run " + write_spec(dir, R"({"kind": "sweep", "methods": ["Ra-opt"], "sweep": {"axis": "tau_u", "values": []}})").string() + out) == 3);
  CHECK(cli("run " + write_spec(dir, R"({"kind": "optimize", "methods": ["R3-opt"], "grid": {"p_aK_min": 0.1, "p_aK_max": 5, "stages": 1}})").string() + out) == 4);
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("run " + write_spec(dir, kValid).string() + out) == 0);
  CHECK(fs::exists(dir / "out" / "bounds.csv"));
}

TEST_CASE("csv output is byte-identical across worker counts") {
  const fs::path dir = scratch_dir("jobs");
  const fs::path spec = write_spec(dir, R"({
    "kind": "sweep",
    "system": {"antennas": 100, "devices": 800},
    "model": {"type": "model3", "alpha": 0.25},
    "monte_carlo": {"n_beta_samples": 40},
    "methods": ["R1-opt", "Ra-opt", "Rh0", "Rh-1D", "Ra-1D", "R3-opt"],
    "sweep": {"axis": "tau_u", "values": [60, 120]},
    "grid": {"tau_p_points": 6, "p_aK_points": 6, "refine_tau_p_points": 4, "refine_p_aK_points": 4, "p_aK_max": 120}
  })");
  REQUIRE(cli("run " + spec.string() + " --seed 7 --jobs 1 --out " + (dir / "a").string()) == 0);
  REQUIRE(cli("run " + spec.string() + " --seed 7 --jobs 3 --out " + (dir / "b").string()) == 0);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    CHECK(slurp(entry.path()) == slurp(dir / "b" / entry.path().filename()));
    ++compared;
  }
  CHECK(compared == 4);
  REQUIRE(cli("run " + spec.string() + " --seed 8 --jobs 1 --out " + (dir / "c").string()) == 0);
  CHECK(slurp(dir / "a" / "rate.csv") != slurp(dir / "c" / "rate.csv"));
}

TEST_CASE("simulation and comparison runs") {
  const fs::path dir = scratch_dir("sim");
  ExperimentSpec spec = parse_ok(R"({
    "kind": "simulate",
    "system": {"antennas": 32, "devices": 40, "slot_length": 30, "pilot_length": 8, "activation_prob": 0.2},
    "simulation": {"n_slots": 20, "n_frames": 2, "trace": true}
  })");
  spec.output_dir = dir.string();
  const auto files = run(spec);
  CHECK(files.size() == 2);
  for (const auto& f : files) CHECK(fs::file_size(f) > 0);

  spec = parse_ok(R"({
    "kind": "compare",
    "system": {"antennas": 32, "devices": 40, "slot_length": 30},
    "methods": ["Ra-opt"],
    "grid": {"p_aK_max": 30},
    "simulation": {"n_slots": 50, "n_frames": 4}
  })");
  spec.output_dir = (dir / "cmp").string();
  const auto cmp = run(spec);
  REQUIRE(cmp.size() == 1);
  CHECK(slurp(cmp.front()).find("method,tau_p,p_aK,r1_bar") == 0);
}
