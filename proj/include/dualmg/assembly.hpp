// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseLU>

#include "dualmg/mesh.hpp"
#include "dualmg/spaces.hpp"
#include "dualmg/types.hpp"

namespace dualmg {

/// Lame parameters. lambda == kIncompressible selects the exact incompressible
/// limit of the compliance tensor.
struct MaterialParams {
  double mu = 1;
  double lambda = 1;

  static constexpr double kIncompressible = std::numeric_limits<double>::infinity();

  [[nodiscard]] bool incompressible() const { return std::isinf(lambda); }
  /// Coefficient of tr(sigma) I in the compliance tensor, lambda / (2 lambda + 2 mu) in 2D.
  [[nodiscard]] double trace_coupling() const { return incompressible() ? 0.5 : lambda / (2 * lambda + 2 * mu); }
  void validate() const;
};

/// Compliance tensor applied to a 2x2 stress: (sigma - c tr(sigma) I) / (2 mu).
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> compliance_apply(const Eigen::Matrix<Scalar, 2, 2>& sigma, const MaterialParams& mat) {
  const Scalar c = static_cast<Scalar>(mat.trace_coupling());
  Eigen::Matrix<Scalar, 2, 2> out = sigma;
  out.diagonal().array() -= c * sigma.trace();
  return out / static_cast<Scalar>(2 * mat.mu);
}

/// Volumetric force f, prescribed displacement g_D and traction g_N.
struct Loads {
  std::function<Vec2(const Vec2&)> body_force = [](const Vec2&) { return Vec2::Zero(); };
  std::function<Vec2(const Vec2&)> dirichlet = [](const Vec2&) { return Vec2::Zero(); };
  std::function<Vec2(const Vec2&)> neumann = [](const Vec2&) { return Vec2::Zero(); };
};

/// A and B blocks of a saddle point system on free stress dofs. B is kept in
/// both storage orders: columns for B y, rows for B^T z.
struct SaddleOperator {
  SpMat A;          // n x n
  SpMat B;          // m x n
  SpMatRow B_rows;  // same entries as B

  SaddleOperator() = default;
  SaddleOperator(SpMat a, SpMat b);

  [[nodiscard]] Index n() const { return A.rows(); }
  [[nodiscard]] Index m() const { return B.rows(); }
};

struct Residuals {
  VectorXd r_a;
  VectorXd r_b;
  double norm = 0;
  double norm_a = 0;
  double norm_b = 0;

  [[nodiscard]] VectorXd full() const;
};

Residuals residuals(const SaddleOperator& op, const VectorXd& f, const VectorXd& h, const VectorXd& y,
                    const VectorXd& z);

/// Assembled system. Stress dofs on Neumann edges are fixed to the edge
/// interpolant of g_N and eliminated; A, B, f, h act on the free stress dofs.
struct SaddleSystem {
  DofLayout layout;
  MaterialParams material;
  SpMat A_full;     // n_stress x n_stress, before elimination
  SpMat B_full;     // m x n_stress
  VectorXd f_full;  // f_a on all stress dofs
  VectorXd h_full;  // f_b and zero rotation rows, before elimination
  std::vector<Index> free_dofs;     // free index -> stress dof
  std::vector<Index> full_to_free;  // stress dof -> free index or -1
  VectorXd fixed_values;            // prescribed values on constrained dofs, zero elsewhere

  SaddleOperator op;
  VectorXd f;
  VectorXd h;

  [[nodiscard]] Index n_free() const { return op.n(); }
  [[nodiscard]] Index m() const { return op.m(); }
  /// Full stress vector from free values plus the prescribed Neumann values.
  [[nodiscard]] VectorXd expand_stress(const VectorXd& y_free) const;
};

Residuals residuals(const SaddleSystem& system, const VectorXd& y, const VectorXd& z);

/// Assembles a(.,.), b(.,.), c(.,.), f_a and f_b. The rotation is the scalar
/// p with theta = [[0, -p], [p, 0]], so c(tau, p) = int p (tau_21 - tau_12).
SaddleSystem assemble(const Mesh& mesh, const DofLayout& layout, const MaterialParams& mat, const Loads& loads);

/// Free-index maps for a layout (shared by assemble and the multigrid levels).
void free_dof_maps(const DofLayout& layout, std::vector<Index>& free_dofs, std::vector<Index>& full_to_free);

/// Rows and columns of a sparse matrix picked by index lists.
SpMat select(const SpMat& m, const std::vector<Index>& rows, const std::vector<Index>& cols);
std::vector<Index> iota_indices(Index n);

/// [[A, B^T], [B, 0]].
SpMat saddle_matrix(const SaddleOperator& op);

/// Sparse LU of the full saddle matrix, reusable for several right-hand sides.
class SaddleFactorization {
 public:
  explicit SaddleFactorization(const SaddleOperator& op);
  /// Returns the stacked solution [y; z].
  [[nodiscard]] VectorXd solve(const VectorXd& f, const VectorXd& h) const;
  [[nodiscard]] Index n() const { return n_; }

 private:
  Index n_ = 0;
  Index m_ = 0;
  std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
};

/// Direct solve; returns [y; z].
VectorXd direct_solve(const SaddleOperator& op, const VectorXd& f, const VectorXd& h);

/// Pivots of a dense fully pivoted LU of the saddle matrix, used as a
/// numerical witness of the discrete inf-sup condition.
struct PivotReport {
  Index size = 0;
  Index rank = 0;
  double max_pivot = 0;
  double min_pivot = 0;

  [[nodiscard]] double ratio() const { return max_pivot > 0 ? min_pivot / max_pivot : 0; }
};

PivotReport saddle_pivot_report(const SaddleOperator& op);

}  // namespace dualmg
