// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "dualmg/assembly.hpp"
#include "dualmg/mesh.hpp"
#include "dualmg/spaces.hpp"

namespace dualmg {

/// Local boundary treatment of the patch problems.
///  - Neumann: interior stress dofs only, no modification (singular; diagnostics only).
///  - NeumannRemoveRBM: interior stress dofs; the first two displacement dofs
///    and the last rotation dof of the patch are dropped.
///  - NeumannZeroAverage: interior stress dofs; zero patch averages of u_x,
///    u_y and theta are appended as Lagrange constraints.
///  - Dirichlet: all patch stress dofs (interior and patch boundary).
///  - Robin: Dirichlet plus the diagonal G(alpha) on the patch boundary dofs.
enum class LocalBc { Neumann, NeumannRemoveRBM, NeumannZeroAverage, Dirichlet, Robin };

std::string to_string(LocalBc bc);
LocalBc local_bc_from_string(const std::string& name);

struct SmootherConfig {
  LocalBc bc = LocalBc::Robin;
  double alpha = 1;

  void validate() const;
};

/// Discretisation data a patch needs to find its dofs on one level.
struct LevelDofs {
  const Mesh* mesh = nullptr;
  const DofLayout* layout = nullptr;
  /// Stress dof -> free index, -1 for constrained dofs.
  const std::vector<Index>* full_to_free = nullptr;
};

/// Free-index sets of a patch. Multipliers list the displacement dofs of the
/// patch elements (ascending element) followed by the rotation dofs of all
/// their vertices (ascending vertex).
struct PatchDofs {
  std::vector<Index> ext;   // free stress dofs on patch-boundary edges inside the domain
  std::vector<Index> intr;  // free stress dofs on the remaining patch edges and element interiors
  std::vector<Index> mult;
  Index n_disp = 0;  // leading entries of mult that are displacement dofs
  /// 3 x mult.size(): integrals of u_x, u_y and theta over the patch.
  MatrixXd average_constraints;
};

PatchDofs patch_dofs(const LevelDofs& level, const Patch& patch);

/// Dense local saddle problem in [ext, int, mult] ordering.
struct LocalProblem {
  PatchDofs dofs;
  MatrixXd A_ee, A_ie, A_ii;  // A_ie is int x ext
  MatrixXd B_ie, B_ii;        // mult x ext, mult x int
  VectorXd f_ext, f_int, h_loc;

  [[nodiscard]] Index n_ext() const { return static_cast<Index>(dofs.ext.size()); }
  [[nodiscard]] Index n_int() const { return static_cast<Index>(dofs.intr.size()); }
  [[nodiscard]] Index n_mult() const { return static_cast<Index>(dofs.mult.size()); }
  /// Unmodified local saddle matrix [[A_ee, A_ie^T, B_ie^T], [A_ie, A_ii, B_ii^T], [B_ie, B_ii, 0]].
  [[nodiscard]] MatrixXd saddle() const;
  [[nodiscard]] VectorXd rhs() const;
};

/// Restricts the operator and the current residual (r_a, r_b) to a patch.
/// Neumann kinds use interior stress dofs only.
LocalProblem extract_local(const SaddleOperator& op, const LevelDofs& level, const Patch& patch, LocalBc bc,
                           const VectorXd& r_a, const VectorXd& r_b);

/// Diagonal of G(alpha): alpha times the largest absolute entry of each
/// patch-boundary row of [A_ee, A_ie^T, B_ie^T].
VectorXd robin_matrix(const LocalProblem& local, double alpha);

class SingularLocalSystem : public Error {
 public:
  SingularLocalSystem(Index size, Index rank);
  Index size;
  Index rank;
  [[nodiscard]] Index deficiency() const { return size - rank; }
};

/// Correction in local ordering: y = [ext; int], z = mult.
struct LocalCorrection {
  VectorXd y;
  VectorXd z;
};

/// Factorised local operator of one patch for a given boundary treatment.
class LocalSolver {
 public:
  LocalSolver() = default;
  LocalSolver(const LocalProblem& local, const SmootherConfig& config);

  /// rhs in [ext, int, mult] ordering.
  [[nodiscard]] LocalCorrection solve(const VectorXd& rhs) const;
  /// Matrix actually factorised (after G, dof removal or constraint rows).
  [[nodiscard]] const MatrixXd& matrix() const { return matrix_; }

 private:
  LocalBc bc_ = LocalBc::Robin;
  Index n_loc_ = 0;
  Index m_loc_ = 0;
  std::vector<Index> kept_;  // rows of the unmodified system kept in matrix_
  MatrixXd matrix_;
  Eigen::FullPivLU<MatrixXd> lu_;
};

/// Solves one local problem without caching.
LocalCorrection local_solve(const LocalProblem& local, const SmootherConfig& config);

/// Multiplicative (Gauss-Seidel style) patch smoother on one level. Patch
/// factorisations are computed once; the local right-hand side is always the
/// current residual.
class PatchSmoother {
 public:
  PatchSmoother() = default;
  PatchSmoother(const SaddleOperator& op, const LevelDofs& level, std::vector<Patch> patches,
                const SmootherConfig& config);

  /// One sweep over all patches in ascending anchor order. Returns the
  /// residuals after the sweep.
  Residuals sweep(const SaddleOperator& op, const VectorXd& f, const VectorXd& h, VectorXd& y, VectorXd& z) const;

  /// Applies the correction of a single patch given the current residual,
  /// updating (y, z) and the residual in place.
  void apply_patch(std::size_t index, const SaddleOperator& op, VectorXd& y, VectorXd& z, VectorXd& r_a,
                   VectorXd& r_b) const;

  [[nodiscard]] std::size_t num_patches() const { return patches_.size(); }
  [[nodiscard]] const Patch& patch(std::size_t i) const { return patches_[i]; }
  [[nodiscard]] const PatchDofs& dofs(std::size_t i) const { return dofs_[i]; }
  [[nodiscard]] const SmootherConfig& config() const { return config_; }

 private:
  SmootherConfig config_;
  std::vector<Patch> patches_;
  std::vector<PatchDofs> dofs_;
  std::vector<LocalSolver> solvers_;
};

/// Runs one sweep with a freshly built smoother.
Residuals sweep(const SaddleSystem& system, const Mesh& mesh, const std::vector<Patch>& patches,
                const SmootherConfig& config, VectorXd& y, VectorXd& z);

}  // namespace dualmg
