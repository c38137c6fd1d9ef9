// Copyright 2026 The rpda Authors.
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "rpda/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Random pilot and data access: bounds, optimization and simulation"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  unsigned jobs = 0;
  app.add_option("--seed", seed, "Override the spec's root seed");
  app.add_option("--out", out_dir, "Output directory for CSV files");
  app.add_option("--jobs", jobs, "Worker threads (0 = all cores)");

  std::string run_path;
  auto* run = app.add_subcommand("run", "Run an experiment spec");
  run->add_option("spec", run_path, "Experiment spec (JSON)")->required();
  run->fallthrough();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a spec without running it");
  validate->add_option("spec", validate_path, "Experiment spec (JSON)")->required();
  validate->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : rpda::kExitParse;
  }

  if (*run) {
    return rpda::run_file(run_path, {seed, out_dir, jobs}, std::cout, std::cerr);
  }
  return rpda::validate_file(validate_path, std::cout, std::cerr);
}
