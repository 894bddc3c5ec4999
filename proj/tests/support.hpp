// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <random>
#include <vector>

#include "dualmg/assembly.hpp"
#include "dualmg/mesh.hpp"
#include "dualmg/problems.hpp"

namespace dualmg::test {

inline BoundaryClassifier all(BoundaryLabel label) {
  return [label](const Vec2&) { return label; };
}

/// Dirichlet on x = 0 and y = 0, Neumann on the rest of the unit square.
inline BoundaryClassifier left_bottom_dirichlet() {
  return [](const Vec2& x) {
    return (x(0) < 1e-12 || x(1) < 1e-12) ? BoundaryLabel::Dirichlet : BoundaryLabel::Neumann;
  };
}

inline Mesh reference_triangle(BoundaryLabel label = BoundaryLabel::Dirichlet) {
  return build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, all(label));
}

inline Mesh two_triangle_square(BoundaryLabel label = BoundaryLabel::Dirichlet) {
  return unit_square_mesh(1, all(label));
}

/// A slightly skewed, non-symmetric mesh so that no test passes by symmetry.
inline Mesh skewed_mesh(const BoundaryClassifier& classifier) {
  return quad_mesh({0, 0}, {1.3, 0.1}, {1.1, 0.9}, {-0.1, 1.2}, 3, classifier);
}

inline VectorXd random_vector(Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1, 1);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

inline Vec2 random_point_in(const Mesh& mesh, int t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0, 1);
  double a = dist(rng), b = dist(rng);
  if (a + b > 1) {
    a = 1 - a;
    b = 1 - b;
  }
  const auto& tri = mesh.triangles[t];
  const Vec2& p0 = mesh.vertices[tri[0]];
  return p0 + a * (mesh.vertices[tri[1]] - p0) + b * (mesh.vertices[tri[2]] - p0);
}

inline double relative_frobenius(const SpMat& a, const SpMat& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return SpMat(a - b).norm() / scale;
}

}  // namespace dualmg::test
