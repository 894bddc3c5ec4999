// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "dualmg/assembly.hpp"
#include "dualmg/multigrid.hpp"
#include "dualmg/smoother.hpp"

namespace dualmg {

enum class ProblemKind { Cook, Face, DualPoisson, Manufactured };
enum class RunMode { SmoothOnly, VCycle, TwoGrid, Direct };

std::string to_string(ProblemKind kind);
std::string to_string(RunMode mode);
ProblemKind problem_kind_from_string(const std::string& name);
RunMode run_mode_from_string(const std::string& name);

struct RunConfig {
  ProblemKind problem = ProblemKind::Cook;
  RunMode mode = RunMode::VCycle;
  /// Number of uniform refinements of the coarse mesh (levels - 1).
  int refinements = 2;
  /// Cells per side of the coarse grid; 0 keeps the problem default.
  int cells = 0;
  std::vector<double> alphas{0, 0.01, 0.1, 1, 10, 100};
  LocalBc bc = LocalBc::Robin;
  int pre_smooth = 5;
  int post_smooth = 5;
  int sweeps = 100;
  double tol = 1e-8;
  int max_cycles = 50;
  /// 0 starts from zero; any other value draws a seeded random initial guess.
  std::uint64_t seed = 0;
  double mu = 1;
  /// Empty keeps the problem default (infinite for cook and face).
  std::string lambda;
  std::filesystem::path out = "results";
  std::string name;

  void validate() const;
  /// Base name of the output files of one alpha value.
  [[nodiscard]] std::string run_name(double alpha) const;
};

/// Flat "key = value" text; '#' starts a comment. Unknown keys are errors.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
/// Applies one key/value pair (same keys as the config file).
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Summary of a single alpha value.
struct RunResult {
  double alpha = 0;
  std::vector<Index> dofs_per_level;
  ResidualLog log;
  int iterations = 0;
  bool converged = false;
  double contraction = 0;
  nlohmann::json extra = nlohmann::json::object();

  [[nodiscard]] nlohmann::json summary(const RunConfig& config) const;
};

/// Runs a single alpha value without writing anything.
RunResult run_single(const RunConfig& config, double alpha);

/// Runs every alpha of the sweep (in parallel up to DUALMG_THREADS workers) and
/// writes <out>/<run_name>.csv and <out>/<run_name>.json for each.
std::vector<RunResult> run(const RunConfig& config);

void write_csv(std::ostream& out, const ResidualLog& log);
/// Worker count from DUALMG_THREADS (default 1, capped by the number of jobs).
int sweep_threads(std::size_t jobs);

/// Aligned table of (problem, mode, alpha, dofs, iterations, contraction, converged).
std::string summarize(const std::vector<nlohmann::json>& summaries, bool csv = false);
std::string summarize_files(const std::vector<std::filesystem::path>& paths, bool csv = false);

}  // namespace dualmg
