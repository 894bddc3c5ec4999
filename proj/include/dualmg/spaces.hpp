// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "dualmg/mesh.hpp"
#include "dualmg/types.hpp"

namespace dualmg {

using Index = Eigen::Index;

/// Global numbering for the stress / displacement / rotation triplet.
///
/// Stress: two independent RT1 rows, each with 2 dofs per edge followed by 2
/// interior dofs per triangle. Multipliers: discontinuous P1 displacement
/// (6 per triangle, vertex-major then component) followed by one continuous P1
/// rotation per vertex.
struct DofLayout {
  int num_vertices = 0;
  int num_edges = 0;
  int num_triangles = 0;
  /// Stress dofs on Neumann boundary edges (eliminated during assembly), ascending.
  std::vector<Index> constrained;

  [[nodiscard]] Index stress_per_row() const { return 2 * Index(num_edges) + 2 * Index(num_triangles); }
  [[nodiscard]] Index n_stress() const { return 2 * stress_per_row(); }
  [[nodiscard]] Index n_disp() const { return 6 * Index(num_triangles); }
  [[nodiscard]] Index n_rot() const { return num_vertices; }
  [[nodiscard]] Index n() const { return n_stress(); }
  [[nodiscard]] Index m() const { return n_disp() + n_rot(); }

  /// k selects the endpoint edges[e].vertices[k] of the edge Lagrange function.
  [[nodiscard]] Index stress_edge_dof(int row, int edge, int k) const {
    return row * stress_per_row() + 2 * Index(edge) + k;
  }
  [[nodiscard]] Index stress_interior_dof(int row, int triangle, int c) const {
    return row * stress_per_row() + 2 * Index(num_edges) + 2 * Index(triangle) + c;
  }
  [[nodiscard]] Index disp_dof(int triangle, int local_vertex, int component) const {
    return 6 * Index(triangle) + 2 * local_vertex + component;
  }
  [[nodiscard]] Index rot_dof(int vertex) const { return n_disp() + vertex; }
};

enum class DofEntity { Edge, Triangle, Vertex };

/// Owner of a global dof: the mesh entity, its local slot and tensor row / vector component.
struct DofOwner {
  DofEntity entity;
  int index;
  int local;
  int row_or_component;
};

DofLayout build_layout(const Mesh& mesh);

/// Global stress dof of local RT1 dof i (0..7) of triangle t in the given row.
/// Local dofs 2l+k live on local edge l, endpoint edges[..].vertices[k];
/// local dofs 6 and 7 are the interior x / y moments.
Index local_stress_dof(const Mesh& mesh, const DofLayout& layout, int row, int t, int i);

DofOwner stress_owner(const DofLayout& layout, Index dof);
DofOwner multiplier_owner(const DofLayout& layout, Index dof);

/// RT1 shape functions of one triangle, dual to the dof functionals
///   N_{2l+k}(tau) = int_{e_l} (tau . n_e) phi_k ds   (phi_k edge Lagrange function, n_e global normal)
///   N_{6+c}(tau)  = int_K tau_c dx.
/// The basis is built directly in physical coordinates, so no sign flips are
/// needed between local and global numbering.
class Rt1Element {
 public:
  Rt1Element() = default;
  Rt1Element(const Mesh& mesh, int triangle);

  /// Columns are the 8 basis fields evaluated at the physical point x.
  [[nodiscard]] Eigen::Matrix<double, 2, 8> values(const Vec2& x) const;
  [[nodiscard]] Eigen::Matrix<double, 1, 8> divergences(const Vec2& x) const;
  /// Column i holds the monomial coefficients of basis function i.
  [[nodiscard]] const Eigen::Matrix<double, 8, 8>& coefficients() const { return coeffs_; }

  static Eigen::Matrix<double, 2, 8> monomials(const Vec2& xi);
  static Eigen::Matrix<double, 1, 8> monomial_divergences(const Vec2& xi);

 private:
  Vec2 center_ = Vec2::Zero();
  double scale_ = 1;
  Eigen::Matrix<double, 8, 8> coeffs_ = Eigen::Matrix<double, 8, 8>::Identity();
};

std::vector<Rt1Element> build_rt1_elements(const Mesh& mesh);

/// Value of local basis function `local_dof` of `triangle` at a point given in
/// reference coordinates (mapped affinely onto the triangle).
Vec2 eval_rt1_basis(const Mesh& mesh, int triangle, int local_dof, const Vec2& reference_point);

/// Applies the 8 dof functionals of triangle t to an arbitrary vector field.
Eigen::Matrix<double, 8, 1> rt1_functionals(const Mesh& mesh, int t, const std::function<Vec2(const Vec2&)>& field);

/// Canonical interpolant of a (tensor row) vector field into one stress row.
/// Returns the full stress vector with only `row` populated.
VectorXd interpolate_stress_row(const Mesh& mesh, const DofLayout& layout, int row,
                                const std::function<Vec2(const Vec2&)>& field);

/// Canonical interpolant of a 2x2 tensor field into both stress rows.
VectorXd interpolate_stress(const Mesh& mesh, const DofLayout& layout, const std::function<Mat2(const Vec2&)>& field);

/// Row `row` of the discrete stress at a physical point inside triangle t.
Vec2 evaluate_stress_row(const Mesh& mesh, const DofLayout& layout, const std::vector<Rt1Element>& elements,
                         const VectorXd& stress, int row, int t, const Vec2& x);

/// Nodal interpolants of displacement and rotation fields into the multiplier vector.
VectorXd interpolate_multipliers(const Mesh& mesh, const DofLayout& layout,
                                 const std::function<Vec2(const Vec2&)>& displacement,
                                 const std::function<double(const Vec2&)>& rotation);

/// Stress (Pi) and multiplier (Q) prolongations between consecutive levels,
/// on the full (unconstrained) numbering.
struct TransferPair {
  SpMat Pi;  // n_fine x n_coarse
  SpMat Q;   // m_fine x m_coarse
};

TransferPair build_transfer(const Mesh& coarse, const Refinement& refinement, const DofLayout& coarse_layout,
                            const DofLayout& fine_layout);

}  // namespace dualmg
