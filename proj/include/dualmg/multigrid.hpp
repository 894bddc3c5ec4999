// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dualmg/assembly.hpp"
#include "dualmg/mesh.hpp"
#include "dualmg/smoother.hpp"
#include "dualmg/spaces.hpp"

namespace dualmg {

/// Prolongations restricted to free stress dofs.
struct LevelTransfer {
  SpMat Pi;  // n_free(j+1) x n_free(j)
  SpMat Q;   // m(j+1) x m(j)
};

struct Level {
  const Mesh* mesh = nullptr;
  DofLayout layout;
  std::vector<Index> free_dofs;
  std::vector<Index> full_to_free;
  SaddleOperator op;
  std::vector<Patch> patches;

  [[nodiscard]] LevelDofs dofs() const { return {mesh, &layout, &full_to_free}; }
  [[nodiscard]] Index size() const { return op.n() + op.m(); }
};

enum class CycleMode { VCycle, TwoGrid };

std::string to_string(CycleMode mode);

struct CycleConfig {
  int pre_smooth = 5;
  int post_smooth = 5;
  CycleMode mode = CycleMode::VCycle;
  double tol = 1e-8;
  int max_cycles = 50;
  /// Iteration stops early once the residual grows past this factor of the initial one.
  double divergence_factor = 1e12;

  void validate() const;
};

enum class LogEvent { Initial, Sweep, Pre, Coarse, Post };

std::string to_string(LogEvent event);

struct LogEntry {
  int cycle = 0;
  LogEvent event = LogEvent::Initial;
  double res = 0;
  double res_a = 0;
  double res_b = 0;
};

using ResidualLog = std::vector<LogEntry>;

/// Nested levels with Galerkin coarse operators, per-level patch smoothers and
/// a sparse direct solver on level 0. The finest level is assembled directly.
class Hierarchy {
 public:
  Hierarchy(const Mesh& coarse, int refinements, const MaterialParams& material, const Loads& loads,
            const SmootherConfig& smoother);

  [[nodiscard]] int num_levels() const { return static_cast<int>(levels_.size()); }
  [[nodiscard]] int finest() const { return num_levels() - 1; }
  [[nodiscard]] const Level& level(int j) const { return levels_.at(j); }
  /// Transfer from level j to level j + 1.
  [[nodiscard]] const LevelTransfer& transfer(int j) const { return transfers_.at(j); }
  /// Product of all transfers, from level 0 straight to the finest level.
  [[nodiscard]] const LevelTransfer& composite_transfer() const { return composite_; }
  [[nodiscard]] const PatchSmoother& smoother(int j) const { return *smoothers_.at(j); }
  [[nodiscard]] const SaddleFactorization& coarse_solver() const { return *coarse_solver_; }
  [[nodiscard]] const SaddleSystem& fine_system() const { return fine_system_; }
  [[nodiscard]] const MeshHierarchy& meshes() const { return meshes_; }
  [[nodiscard]] const SmootherConfig& smoother_config() const { return smoother_config_; }

 private:
  MeshHierarchy meshes_;
  std::vector<Level> levels_;
  std::vector<LevelTransfer> transfers_;
  LevelTransfer composite_;
  std::vector<std::unique_ptr<PatchSmoother>> smoothers_;
  std::unique_ptr<SaddleFactorization> coarse_solver_;
  SaddleSystem fine_system_;
  SmootherConfig smoother_config_;
};

/// Galerkin coarse operator: A_c = Pi^T A Pi, B_c = Q^T B Pi.
SaddleOperator galerkin(const SaddleOperator& fine, const LevelTransfer& transfer);

/// One V-cycle on the finest level (pre-smooth, restrict, recurse, exact
/// level-0 solve, prolongate, post-smooth). Appends pre / coarse / post
/// entries for the finest level to `log` when given.
void v_cycle(const Hierarchy& hierarchy, VectorXd& y, VectorXd& z, const CycleConfig& config, int cycle_index,
             ResidualLog* log = nullptr);

/// Two-grid cycle between the finest level and level 0 using the composite transfer.
void two_grid(const Hierarchy& hierarchy, VectorXd& y, VectorXd& z, const CycleConfig& config, int cycle_index,
              ResidualLog* log = nullptr);

struct SolveResult {
  VectorXd y;
  VectorXd z;
  ResidualLog log;
  bool converged = false;
  int cycles = 0;
  double initial_residual = 0;
  double final_residual = 0;

  /// Geometric mean reduction per cycle (or per sweep).
  [[nodiscard]] double contraction() const;
};

/// Cycles until ||r|| <= tol ||r_0|| or max_cycles. Non-convergence is a flag, not an error.
SolveResult solve(const Hierarchy& hierarchy, const CycleConfig& config);
SolveResult solve(const Hierarchy& hierarchy, const CycleConfig& config, VectorXd y0, VectorXd z0);

/// Stand-alone smoother iteration, logging after every sweep. Stops early once
/// ||r|| <= tol ||r_0|| when tol > 0.
SolveResult smooth(const SaddleOperator& op, const VectorXd& f, const VectorXd& h, const PatchSmoother& smoother,
                   int sweeps, VectorXd y0, VectorXd z0, double tol = 0);
/// Same on the finest level of a hierarchy.
SolveResult smooth(const Hierarchy& hierarchy, int sweeps, VectorXd y0, VectorXd z0, double tol = 0);

}  // namespace dualmg
