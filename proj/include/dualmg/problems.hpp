// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dualmg/assembly.hpp"
#include "dualmg/mesh.hpp"
#include "dualmg/spaces.hpp"

namespace dualmg {

struct ProblemSpec {
  std::string name;
  BoundaryClassifier classifier;
  MaterialParams material;
  Loads loads;
};

struct Problem {
  ProblemSpec spec;
  MeshHierarchy meshes;

  [[nodiscard]] const Mesh& coarse() const { return meshes.meshes.front(); }
  [[nodiscard]] const Mesh& finest() const { return meshes.meshes.back(); }
};

/// cells x cells grid mapped bilinearly onto the quadrilateral p00, p10, p11, p01
/// (counter-clockwise); every cell is split along its (i, j)-(i+1, j+1) diagonal.
Mesh quad_mesh(const Vec2& p00, const Vec2& p10, const Vec2& p11, const Vec2& p01, int cells,
               const BoundaryClassifier& classifier);
Mesh unit_square_mesh(int cells, const BoundaryClassifier& classifier);

/// Cook membrane (0,0), (48,44), (48,60), (0,44): clamped left edge, traction
/// [0, 0.01] on the right edge, traction free elsewhere. mu = 1, lambda = inf.
Problem cook_problem(int refinements, int cells = 4);

/// Polygonal hole (counter-clockwise vertices); triangles whose centroid lies
/// inside are removed from the grid, so vertices should sit on grid lines.
struct Hole {
  std::vector<Vec2> polygon;
  bool dirichlet = false;
};

/// Two square eyes, a triangular nose (clamped) and a rectangular mouth, on
/// grid lines of a 6 x 6 grid.
std::vector<Hole> default_face_holes();

struct FaceGeometry {
  int cells = 6;
  std::vector<Hole> holes = default_face_holes();
};

/// Unit square with holes: g_D = [0, 0.05 x^2] on the bottom edge, zero
/// displacement on Dirichlet holes, traction free elsewhere. mu = 1, lambda = inf.
Problem face_problem(int refinements, const FaceGeometry& geometry = {});

/// Even-odd point in polygon test.
bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& polygon);

/// Scalar RT1 / DP1 discretisation of -div grad u = f with the Robin condition
/// u + alpha sigma.n = 0 on the whole boundary. M is stored without alpha; the
/// Robin stress block is S + alpha M.
struct DualPoissonSystem {
  double alpha = 0;
  SpMat S;     // int sigma . tau
  SpMat M;     // int_boundary (sigma . n)(tau . n)
  SpMat T;     // int div(sigma) v
  VectorXd f;  // int f v
  std::vector<Index> ext;   // dofs on boundary edges
  std::vector<Index> intr;  // all other stress dofs

  [[nodiscard]] Index n() const { return S.rows(); }
  [[nodiscard]] Index m() const { return T.rows(); }
  [[nodiscard]] SpMat robin_block() const;
  /// [[S + alpha M, T^T], [T, 0]]; alpha = 0 gives the Dirichlet system.
  [[nodiscard]] SpMat robin_saddle() const;
  [[nodiscard]] SpMat dirichlet_saddle() const;
  /// G_ii = alpha max_j |row i of [S_ee, S_ie^T, T_ie^T]| for the ext dofs.
  [[nodiscard]] VectorXd lumped_diagonal() const;
  /// Same saddle matrix with S + G in place of S + alpha M.
  [[nodiscard]] SpMat averaged_saddle() const;
  /// beta_i = G_ii / sum_j M_ij for the ext dofs.
  [[nodiscard]] VectorXd lumping_coefficients() const;
  [[nodiscard]] VectorXd rhs() const;
};

DualPoissonSystem dual_poisson_robin(const Mesh& mesh, double alpha,
                                     const std::function<double(const Vec2&)>& source = [](const Vec2&) {
                                       return 1.0;
                                     });

enum class ManufacturedKind { Linear, Cubic };

/// Polynomial displacement u*, stress sigma* = C eps(u*), rotation p* with
/// theta* = [[0, -p*], [p*, 0]] and body force f = -div sigma*.
struct ManufacturedSolution {
  ManufacturedKind kind = ManufacturedKind::Cubic;
  MaterialParams material;
  std::function<Vec2(const Vec2&)> displacement;
  std::function<Mat2(const Vec2&)> stress;
  std::function<double(const Vec2&)> rotation;
  std::function<Vec2(const Vec2&)> body_force;
};

ManufacturedSolution manufactured_solution(const MaterialParams& material,
                                           ManufacturedKind kind = ManufacturedKind::Cubic);

/// Unit square, Dirichlet data u* on the left and bottom edges, traction
/// sigma* n on the right and top edges. lambda = inf is rejected.
Problem manufactured_elasticity(int refinements, const MaterialParams& material, int cells = 2,
                                ManufacturedKind kind = ManufacturedKind::Cubic);

/// ||sigma_h - sigma*||_L2 for a full stress vector.
double stress_l2_error(const Mesh& mesh, const DofLayout& layout, const VectorXd& stress,
                       const std::function<Mat2(const Vec2&)>& exact);

}  // namespace dualmg
