// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dualmg/multigrid.hpp"

#include <cmath>
#include <functional>
#include <utility>

namespace dualmg {

std::string to_string(CycleMode mode) {
  return mode == CycleMode::VCycle ? "vcycle" : "two_grid";
}

std::string to_string(LogEvent event) {
  switch (event) {
    case LogEvent::Initial:
      return "init";
    case LogEvent::Sweep:
      return "sweep";
    case LogEvent::Pre:
      return "pre";
    case LogEvent::Coarse:
      return "coarse";
    case LogEvent::Post:
      return "post";
  }
  return "unknown";
}

void CycleConfig::validate() const {
  if (pre_smooth < 0 || post_smooth < 0) throw Error("smoothing step counts must be non-negative");
  if (max_cycles < 0) throw Error("max_cycles must be non-negative");
  if (!(tol >= 0)) throw Error("tolerance must be non-negative");
}

SaddleOperator galerkin(const SaddleOperator& fine, const LevelTransfer& transfer) {
  const SpMat PiT = transfer.Pi.transpose();
  const SpMat QT = transfer.Q.transpose();
  SpMat A = PiT * (fine.A * transfer.Pi);
  SpMat B = QT * (fine.B * transfer.Pi);
  A.makeCompressed();
  B.makeCompressed();
  return {std::move(A), std::move(B)};
}

Hierarchy::Hierarchy(const Mesh& coarse, int refinements, const MaterialParams& material, const Loads& loads,
                     const SmootherConfig& smoother)
    : smoother_config_(smoother) {
  if (refinements < 1) throw Error("a hierarchy needs at least one refinement");
  material.validate();
  smoother.validate();
  meshes_ = build_hierarchy_meshes(coarse, refinements);

  const int J = meshes_.finest();
  levels_.resize(J + 1);
  for (int j = 0; j <= J; ++j) {
    Level& level = levels_[j];
    level.mesh = &meshes_.meshes[j];
    level.layout = build_layout(*level.mesh);
    free_dof_maps(level.layout, level.free_dofs, level.full_to_free);
    level.patches = build_patches(*level.mesh);
  }

  transfers_.resize(J);
  for (int j = 0; j < J; ++j) {
    const TransferPair full =
        build_transfer(meshes_.meshes[j], meshes_.refinements[j], levels_[j].layout, levels_[j + 1].layout);
    transfers_[j].Pi = select(full.Pi, levels_[j + 1].free_dofs, levels_[j].free_dofs);
    transfers_[j].Q = full.Q;
  }

  fine_system_ = assemble(*levels_[J].mesh, levels_[J].layout, material, loads);
  levels_[J].op = fine_system_.op;
  for (int j = J - 1; j >= 0; --j) levels_[j].op = galerkin(levels_[j + 1].op, transfers_[j]);

  composite_ = transfers_[0];
  for (int j = 1; j < J; ++j) {
    composite_.Pi = SpMat(transfers_[j].Pi * composite_.Pi);
    composite_.Q = SpMat(transfers_[j].Q * composite_.Q);
  }

  smoothers_.resize(J + 1);
  for (int j = 1; j <= J; ++j)
    smoothers_[j] = std::make_unique<PatchSmoother>(levels_[j].op, levels_[j].dofs(), levels_[j].patches, smoother);
  coarse_solver_ = std::make_unique<SaddleFactorization>(levels_[0].op);
}

namespace {

using Observer = std::function<void(LogEvent, const Residuals&)>;

/// Operators of the levels a cycle visits, coarse first. transfers[k] maps
/// level k to level k + 1 of this list.
struct CycleLevels {
  std::vector<const SaddleOperator*> ops;
  std::vector<const PatchSmoother*> smoothers;
  std::vector<const LevelTransfer*> transfers;
  const SaddleFactorization* coarse = nullptr;
};

void cycle(const CycleLevels& levels, std::size_t k, const VectorXd& f, const VectorXd& h, VectorXd& y,
           VectorXd& z, const CycleConfig& config, const Observer& observe) {
  const SaddleOperator& op = *levels.ops[k];
  if (k == 0) {
    const Residuals r = residuals(op, f, h, y, z);
    const VectorXd c = levels.coarse->solve(r.r_a, r.r_b);
    y += c.head(op.n());
    z += c.tail(op.m());
    return;
  }
  const PatchSmoother& smoother = *levels.smoothers[k];
  Residuals r;
  for (int s = 0; s < config.pre_smooth; ++s) r = smoother.sweep(op, f, h, y, z);
  if (config.pre_smooth == 0) r = residuals(op, f, h, y, z);
  if (observe) observe(LogEvent::Pre, r);

  const LevelTransfer& t = *levels.transfers[k - 1];
  const VectorXd fc = t.Pi.transpose() * r.r_a;
  const VectorXd hc = t.Q.transpose() * r.r_b;
  VectorXd yc = VectorXd::Zero(fc.size());
  VectorXd zc = VectorXd::Zero(hc.size());
  cycle(levels, k - 1, fc, hc, yc, zc, config, nullptr);
  y += t.Pi * yc;
  z += t.Q * zc;
  if (observe) observe(LogEvent::Coarse, residuals(op, f, h, y, z));

  for (int s = 0; s < config.post_smooth; ++s) r = smoother.sweep(op, f, h, y, z);
  if (config.post_smooth == 0) r = residuals(op, f, h, y, z);
  if (observe) observe(LogEvent::Post, r);
}

Observer make_observer(ResidualLog* log, int cycle_index) {
  if (log == nullptr) return nullptr;
  return [log, cycle_index](LogEvent event, const Residuals& r) {
    log->push_back({cycle_index, event, r.norm, r.norm_a, r.norm_b});
  };
}

CycleLevels cycle_levels(const Hierarchy& hierarchy, CycleMode mode) {
  CycleLevels levels;
  levels.coarse = &hierarchy.coarse_solver();
  const int J = hierarchy.finest();
  if (mode == CycleMode::TwoGrid) {
    levels.ops = {&hierarchy.level(0).op, &hierarchy.level(J).op};
    levels.smoothers = {nullptr, &hierarchy.smoother(J)};
    levels.transfers = {&hierarchy.composite_transfer()};
    return levels;
  }
  for (int j = 0; j <= J; ++j) {
    levels.ops.push_back(&hierarchy.level(j).op);
    levels.smoothers.push_back(j == 0 ? nullptr : &hierarchy.smoother(j));
    if (j < J) levels.transfers.push_back(&hierarchy.transfer(j));
  }
  return levels;
}

void run_cycle(const Hierarchy& hierarchy, CycleMode mode, VectorXd& y, VectorXd& z, const CycleConfig& config,
               int cycle_index, ResidualLog* log) {
  const CycleLevels levels = cycle_levels(hierarchy, mode);
  const SaddleSystem& fine = hierarchy.fine_system();
  cycle(levels, levels.ops.size() - 1, fine.f, fine.h, y, z, config, make_observer(log, cycle_index));
}

bool diverged(double r, double r0, double factor) {
  return !std::isfinite(r) || (r0 > 0 && r > factor * r0);
}

}  // namespace

void v_cycle(const Hierarchy& hierarchy, VectorXd& y, VectorXd& z, const CycleConfig& config, int cycle_index,
             ResidualLog* log) {
  run_cycle(hierarchy, CycleMode::VCycle, y, z, config, cycle_index, log);
}

void two_grid(const Hierarchy& hierarchy, VectorXd& y, VectorXd& z, const CycleConfig& config, int cycle_index,
              ResidualLog* log) {
  run_cycle(hierarchy, CycleMode::TwoGrid, y, z, config, cycle_index, log);
}

double SolveResult::contraction() const {
  if (cycles == 0 || initial_residual == 0) return 0;
  return std::pow(final_residual / initial_residual, 1.0 / cycles);
}

SolveResult solve(const Hierarchy& hierarchy, const CycleConfig& config) {
  const SaddleSystem& fine = hierarchy.fine_system();
  return solve(hierarchy, config, VectorXd::Zero(fine.n_free()), VectorXd::Zero(fine.m()));
}

SolveResult solve(const Hierarchy& hierarchy, const CycleConfig& config, VectorXd y0, VectorXd z0) {
  config.validate();
  const SaddleSystem& fine = hierarchy.fine_system();
  SolveResult result;
  result.y = std::move(y0);
  result.z = std::move(z0);
  const Residuals r0 = residuals(fine.op, fine.f, fine.h, result.y, result.z);
  result.initial_residual = result.final_residual = r0.norm;
  result.log.push_back({0, LogEvent::Initial, r0.norm, r0.norm_a, r0.norm_b});

  for (int c = 1; c <= config.max_cycles; ++c) {
    run_cycle(hierarchy, config.mode, result.y, result.z, config, c, &result.log);
    result.cycles = c;
    result.final_residual = result.log.back().res;
    if (diverged(result.final_residual, r0.norm, config.divergence_factor)) break;
    if (result.final_residual <= config.tol * r0.norm) {
      result.converged = true;
      break;
    }
  }
  return result;
}

SolveResult smooth(const SaddleOperator& op, const VectorXd& f, const VectorXd& h, const PatchSmoother& smoother,
                   int sweeps, VectorXd y0, VectorXd z0, double tol) {
  if (sweeps < 0) throw Error("sweep count must be non-negative");
  SolveResult result;
  result.y = std::move(y0);
  result.z = std::move(z0);
  const Residuals r0 = residuals(op, f, h, result.y, result.z);
  result.initial_residual = result.final_residual = r0.norm;
  result.log.push_back({0, LogEvent::Initial, r0.norm, r0.norm_a, r0.norm_b});

  for (int s = 1; s <= sweeps; ++s) {
    const Residuals r = smoother.sweep(op, f, h, result.y, result.z);
    result.log.push_back({s, LogEvent::Sweep, r.norm, r.norm_a, r.norm_b});
    result.cycles = s;
    result.final_residual = r.norm;
    if (!std::isfinite(r.norm)) break;
    if (tol > 0 && r.norm <= tol * r0.norm) {
      result.converged = true;
      break;
    }
  }
  return result;
}

SolveResult smooth(const Hierarchy& hierarchy, int sweeps, VectorXd y0, VectorXd z0, double tol) {
  const SaddleSystem& fine = hierarchy.fine_system();
  return smooth(fine.op, fine.f, fine.h, hierarchy.smoother(hierarchy.finest()), sweeps, std::move(y0),
                std::move(z0), tol);
}

}  // namespace dualmg
