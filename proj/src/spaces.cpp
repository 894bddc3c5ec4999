// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dualmg/spaces.hpp"

#include <algorithm>
#include <Eigen/LU>

#include "dualmg/quadrature.hpp"

namespace dualmg {

namespace {

constexpr int kEdgePoints = 4;
constexpr int kInteriorOrder = 6;

const QuadratureRule<double, 1>& edge_rule() {
  static const auto rule = gauss_legendre_unit<double>(kEdgePoints);
  return rule;
}

}  // namespace

DofLayout build_layout(const Mesh& mesh) {
  DofLayout layout;
  layout.num_vertices = mesh.num_vertices();
  layout.num_edges = mesh.num_edges();
  layout.num_triangles = mesh.num_triangles();
  for (int row = 0; row < 2; ++row) {
    for (int e : mesh.boundary_edges) {
      if (mesh.label(e) != BoundaryLabel::Neumann) continue;
      layout.constrained.push_back(layout.stress_edge_dof(row, e, 0));
      layout.constrained.push_back(layout.stress_edge_dof(row, e, 1));
    }
  }
  std::sort(layout.constrained.begin(), layout.constrained.end());
  return layout;
}

Index local_stress_dof(const Mesh& mesh, const DofLayout& layout, int row, int t, int i) {
  if (i < 6) return layout.stress_edge_dof(row, mesh.triangle_edges[t][i / 2], i % 2);
  return layout.stress_interior_dof(row, t, i - 6);
}

DofOwner stress_owner(const DofLayout& layout, Index dof) {
  if (dof < 0 || dof >= layout.n_stress()) throw Error("stress_owner: dof out of range");
  const int row = static_cast<int>(dof / layout.stress_per_row());
  const Index r = dof % layout.stress_per_row();
  if (r < 2 * Index(layout.num_edges)) return {DofEntity::Edge, static_cast<int>(r / 2), static_cast<int>(r % 2), row};
  const Index q = r - 2 * Index(layout.num_edges);
  return {DofEntity::Triangle, static_cast<int>(q / 2), static_cast<int>(q % 2), row};
}

DofOwner multiplier_owner(const DofLayout& layout, Index dof) {
  if (dof < 0 || dof >= layout.m()) throw Error("multiplier_owner: dof out of range");
  if (dof < layout.n_disp()) {
    return {DofEntity::Triangle, static_cast<int>(dof / 6), static_cast<int>((dof % 6) / 2), static_cast<int>(dof % 2)};
  }
  return {DofEntity::Vertex, static_cast<int>(dof - layout.n_disp()), 0, 0};
}

Eigen::Matrix<double, 8, 1> rt1_functionals(const Mesh& mesh, int t, const std::function<Vec2(const Vec2&)>& field) {
  Eigen::Matrix<double, 8, 1> out = Eigen::Matrix<double, 8, 1>::Zero();
  const auto& line = edge_rule();
  for (int l = 0; l < 3; ++l) {
    const Edge& edge = mesh.edges[mesh.triangle_edges[t][l]];
    const Vec2& p0 = mesh.vertices[edge.vertices[0]];
    const Vec2& p1 = mesh.vertices[edge.vertices[1]];
    for (std::size_t q = 0; q < line.size(); ++q) {
      const double s = line.points[q](0);
      const double w = line.weights[q] * edge.length;
      const double flux = field(p0 + s * (p1 - p0)).dot(edge.normal);
      out(2 * l) += w * flux * (1 - s);
      out(2 * l + 1) += w * flux * s;
    }
  }
  const auto& tri = mesh.triangles[t];
  const auto rule = quadrature(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], kInteriorOrder);
  for (std::size_t q = 0; q < rule.size(); ++q) out.tail<2>() += rule.weights[q] * field(rule.points[q]);
  return out;
}

Eigen::Matrix<double, 2, 8> Rt1Element::monomials(const Vec2& xi) {
  Eigen::Matrix<double, 2, 8> p;
  // P1^2 followed by the two homogeneous fields xi * xi_1, xi * xi_2.
  p << 1, xi(0), xi(1), 0, 0, 0, xi(0) * xi(0), xi(0) * xi(1),  //
      0, 0, 0, 1, xi(0), xi(1), xi(0) * xi(1), xi(1) * xi(1);
  return p;
}

Eigen::Matrix<double, 1, 8> Rt1Element::monomial_divergences(const Vec2& xi) {
  Eigen::Matrix<double, 1, 8> d;
  d << 0, 1, 0, 0, 0, 1, 3 * xi(0), 3 * xi(1);
  return d;
}

Rt1Element::Rt1Element(const Mesh& mesh, int triangle) {
  const auto& tri = mesh.triangles[triangle];
  if (!(mesh.area(triangle) > 0)) throw Error("Rt1Element: degenerate triangle " + std::to_string(triangle));
  center_ = mesh.centroid(triangle);
  scale_ = 0;
  for (int k = 0; k < 3; ++k) {
    scale_ = std::max(scale_, (mesh.vertices[tri[(k + 1) % 3]] - mesh.vertices[tri[k]]).norm());
  }
  Eigen::Matrix<double, 8, 8> dof_values;
  for (int j = 0; j < 8; ++j) {
    dof_values.col(j) = rt1_functionals(mesh, triangle, [&](const Vec2& x) -> Vec2 {
      return monomials((x - center_) / scale_).col(j);
    });
  }
  coeffs_ = dof_values.fullPivLu().inverse();
}

Eigen::Matrix<double, 2, 8> Rt1Element::values(const Vec2& x) const {
  return monomials((x - center_) / scale_) * coeffs_;
}

Eigen::Matrix<double, 1, 8> Rt1Element::divergences(const Vec2& x) const {
  return monomial_divergences((x - center_) / scale_) * coeffs_ / scale_;
}

std::vector<Rt1Element> build_rt1_elements(const Mesh& mesh) {
  std::vector<Rt1Element> elements;
  elements.reserve(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) elements.emplace_back(mesh, t);
  return elements;
}

Vec2 eval_rt1_basis(const Mesh& mesh, int triangle, int local_dof, const Vec2& reference_point) {
  if (local_dof < 0 || local_dof >= 8) throw Error("eval_rt1_basis: local dof out of range");
  const auto& tri = mesh.triangles[triangle];
  const Vec2& a = mesh.vertices[tri[0]];
  const Vec2 x = a + reference_point(0) * (mesh.vertices[tri[1]] - a) + reference_point(1) * (mesh.vertices[tri[2]] - a);
  return Rt1Element(mesh, triangle).values(x).col(local_dof);
}

VectorXd interpolate_stress_row(const Mesh& mesh, const DofLayout& layout, int row,
                                const std::function<Vec2(const Vec2&)>& field) {
  VectorXd y = VectorXd::Zero(layout.n_stress());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto values = rt1_functionals(mesh, t, field);
    for (int i = 0; i < 8; ++i) y(local_stress_dof(mesh, layout, row, t, i)) = values(i);
  }
  return y;
}

VectorXd interpolate_stress(const Mesh& mesh, const DofLayout& layout, const std::function<Mat2(const Vec2&)>& field) {
  VectorXd y = VectorXd::Zero(layout.n_stress());
  for (int row = 0; row < 2; ++row) {
    y += interpolate_stress_row(mesh, layout, row, [&](const Vec2& x) -> Vec2 { return field(x).row(row).transpose(); });
  }
  return y;
}

Vec2 evaluate_stress_row(const Mesh& mesh, const DofLayout& layout, const std::vector<Rt1Element>& elements,
                         const VectorXd& stress, int row, int t, const Vec2& x) {
  Eigen::Matrix<double, 8, 1> c;
  for (int i = 0; i < 8; ++i) c(i) = stress(local_stress_dof(mesh, layout, row, t, i));
  return elements[t].values(x) * c;
}

VectorXd interpolate_multipliers(const Mesh& mesh, const DofLayout& layout,
                                 const std::function<Vec2(const Vec2&)>& displacement,
                                 const std::function<double(const Vec2&)>& rotation) {
  VectorXd z = VectorXd::Zero(layout.m());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 u = displacement(mesh.vertices[mesh.triangles[t][k]]);
      z(layout.disp_dof(t, k, 0)) = u(0);
      z(layout.disp_dof(t, k, 1)) = u(1);
    }
  }
  for (int v = 0; v < mesh.num_vertices(); ++v) z(layout.rot_dof(v)) = rotation(mesh.vertices[v]);
  return z;
}

TransferPair build_transfer(const Mesh& coarse, const Refinement& refinement, const DofLayout& coarse_layout,
                            const DofLayout& fine_layout) {
  const Mesh& fine = refinement.fine;
  if (static_cast<int>(refinement.parent.size()) != fine.num_triangles() ||
      static_cast<int>(refinement.child_map.size()) != coarse.num_triangles() ||
      fine_layout.num_triangles != 4 * coarse_layout.num_triangles) {
    throw Error("build_transfer: meshes are not a nested refinement pair");
  }
  const auto coarse_elements = build_rt1_elements(coarse);
  const auto& line = edge_rule();

  // Stress: apply every fine dof functional to the basis of the coarse parent.
  std::vector<Triplet> pi;
  auto emit = [&](Index fine_dof_row0, int parent, const Eigen::Matrix<double, 1, 8>& values) {
    const double scale = values.cwiseAbs().maxCoeff();
    for (int row = 0; row < 2; ++row) {
      const Index fine_dof = fine_dof_row0 + row * fine_layout.stress_per_row();
      for (int i = 0; i < 8; ++i) {
        if (std::abs(values(i)) <= 1e-13 * scale) continue;
        pi.emplace_back(fine_dof, local_stress_dof(coarse, coarse_layout, row, parent, i), values(i));
      }
    }
  };

  for (int fe = 0; fe < fine.num_edges(); ++fe) {
    const Edge& edge = fine.edges[fe];
    const int parent = refinement.parent[edge.triangles[0]];
    const Vec2& p0 = fine.vertices[edge.vertices[0]];
    const Vec2& p1 = fine.vertices[edge.vertices[1]];
    Eigen::Matrix<double, 2, 8> moments = Eigen::Matrix<double, 2, 8>::Zero();
    for (std::size_t q = 0; q < line.size(); ++q) {
      const double s = line.points[q](0);
      const double w = line.weights[q] * edge.length;
      const auto flux = (edge.normal.transpose() * coarse_elements[parent].values(p0 + s * (p1 - p0))).eval();
      moments.row(0) += w * (1 - s) * flux;
      moments.row(1) += w * s * flux;
    }
    for (int k = 0; k < 2; ++k) emit(fine_layout.stress_edge_dof(0, fe, k), parent, moments.row(k));
  }
  for (int ft = 0; ft < fine.num_triangles(); ++ft) {
    const int parent = refinement.parent[ft];
    const auto& tri = fine.triangles[ft];
    const auto rule = quadrature(fine.vertices[tri[0]], fine.vertices[tri[1]], fine.vertices[tri[2]], kInteriorOrder);
    Eigen::Matrix<double, 2, 8> moments = Eigen::Matrix<double, 2, 8>::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) moments += rule.weights[q] * coarse_elements[parent].values(rule.points[q]);
    for (int c = 0; c < 2; ++c) emit(fine_layout.stress_interior_dof(0, ft, c), parent, moments.row(c));
  }

  // Multipliers: nodal interpolation of the coarse P1 functions. Fine vertices
  // are coarse vertices (weight 1) or coarse edge midpoints (weights 1/2).
  const int nv = coarse.num_vertices();
  std::vector<Triplet> q;
  for (int ft = 0; ft < fine.num_triangles(); ++ft) {
    const int parent = refinement.parent[ft];
    const auto& ctri = coarse.triangles[parent];
    auto local_of = [&](int v) {
      for (int l = 0; l < 3; ++l) {
        if (ctri[l] == v) return l;
      }
      throw Error("build_transfer: fine vertex not in parent triangle");
    };
    for (int k = 0; k < 3; ++k) {
      const int v = fine.triangles[ft][k];
      for (int c = 0; c < 2; ++c) {
        const Index row = fine_layout.disp_dof(ft, k, c);
        if (v < nv) {
          q.emplace_back(row, coarse_layout.disp_dof(parent, local_of(v), c), 1.0);
        } else {
          const auto& ev = coarse.edges[v - nv].vertices;
          q.emplace_back(row, coarse_layout.disp_dof(parent, local_of(ev[0]), c), 0.5);
          q.emplace_back(row, coarse_layout.disp_dof(parent, local_of(ev[1]), c), 0.5);
        }
      }
    }
  }
  for (int v = 0; v < fine.num_vertices(); ++v) {
    if (v < nv) {
      q.emplace_back(fine_layout.rot_dof(v), coarse_layout.rot_dof(v), 1.0);
    } else {
      const auto& ev = coarse.edges[v - nv].vertices;
      q.emplace_back(fine_layout.rot_dof(v), coarse_layout.rot_dof(ev[0]), 0.5);
      q.emplace_back(fine_layout.rot_dof(v), coarse_layout.rot_dof(ev[1]), 0.5);
    }
  }

  TransferPair out;
  out.Pi.resize(fine_layout.n_stress(), coarse_layout.n_stress());
  out.Pi.setFromTriplets(pi.begin(), pi.end());
  out.Q.resize(fine_layout.m(), coarse_layout.m());
  out.Q.setFromTriplets(q.begin(), q.end());
  return out;
}

}  // namespace dualmg
