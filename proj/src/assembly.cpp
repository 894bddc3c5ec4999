// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dualmg/assembly.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/LU>

#include "dualmg/quadrature.hpp"

namespace dualmg {

namespace {

constexpr int kQuadratureOrder = 4;

}  // namespace

void MaterialParams::validate() const {
  if (!(mu > 0)) throw Error("MaterialParams: mu must be positive");
  if (!(lambda > 0)) throw Error("MaterialParams: lambda must be positive or infinite");
}

SaddleOperator::SaddleOperator(SpMat a, SpMat b) : A(std::move(a)), B(std::move(b)), B_rows(B) {
  A.makeCompressed();
  B.makeCompressed();
  B_rows.makeCompressed();
}

VectorXd Residuals::full() const {
  VectorXd r(r_a.size() + r_b.size());
  r << r_a, r_b;
  return r;
}

Residuals residuals(const SaddleOperator& op, const VectorXd& f, const VectorXd& h, const VectorXd& y,
                    const VectorXd& z) {
  if (f.size() != op.n() || y.size() != op.n() || h.size() != op.m() || z.size() != op.m()) {
    throw Error("residuals: dimension mismatch");
  }
  Residuals r;
  r.r_a = f - op.A * y - op.B_rows.transpose() * z;
  r.r_b = h - op.B * y;
  r.norm_a = r.r_a.norm();
  r.norm_b = r.r_b.norm();
  r.norm = std::hypot(r.norm_a, r.norm_b);
  return r;
}

Residuals residuals(const SaddleSystem& system, const VectorXd& y, const VectorXd& z) {
  return residuals(system.op, system.f, system.h, y, z);
}

VectorXd SaddleSystem::expand_stress(const VectorXd& y_free) const {
  VectorXd y = fixed_values;
  for (std::size_t i = 0; i < free_dofs.size(); ++i) y(free_dofs[i]) = y_free(static_cast<Index>(i));
  return y;
}

void free_dof_maps(const DofLayout& layout, std::vector<Index>& free_dofs, std::vector<Index>& full_to_free) {
  full_to_free.assign(layout.n_stress(), 0);
  for (Index d : layout.constrained) full_to_free[d] = -1;
  free_dofs.clear();
  for (Index d = 0; d < layout.n_stress(); ++d) {
    if (full_to_free[d] < 0) continue;
    full_to_free[d] = static_cast<Index>(free_dofs.size());
    free_dofs.push_back(d);
  }
}

std::vector<Index> iota_indices(Index n) {
  std::vector<Index> out(n);
  std::iota(out.begin(), out.end(), Index(0));
  return out;
}

SpMat select(const SpMat& m, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  std::vector<Index> row_map(m.rows(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) row_map[rows[i]] = static_cast<Index>(i);
  std::vector<Triplet> t;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (SpMat::InnerIterator it(m, cols[j]); it; ++it) {
      if (row_map[it.row()] >= 0) t.emplace_back(row_map[it.row()], static_cast<Index>(j), it.value());
    }
  }
  SpMat out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SaddleSystem assemble(const Mesh& mesh, const DofLayout& layout, const MaterialParams& mat, const Loads& loads) {
  mat.validate();
  if (layout.num_triangles != mesh.num_triangles() || layout.num_edges != mesh.num_edges()) {
    throw Error("assemble: layout does not belong to mesh");
  }
  const Index n = layout.n_stress();
  const Index m = layout.m();
  const double inv_2mu = 1.0 / (2 * mat.mu);
  const double coupling = mat.trace_coupling();
  const auto elements = build_rt1_elements(mesh);
  const auto ref_rule = reference_triangle_rule<double>(kQuadratureOrder);

  std::vector<Triplet> a_trip, b_trip;
  a_trip.reserve(std::size_t(mesh.num_triangles()) * 256);
  b_trip.reserve(std::size_t(mesh.num_triangles()) * 16 * 9);
  VectorXd h_full = VectorXd::Zero(m);

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2& v0 = mesh.vertices[tri[0]];
    const Vec2 e1 = mesh.vertices[tri[1]] - v0;
    const Vec2 e2 = mesh.vertices[tri[2]] - v0;
    const double jac = 2 * mesh.area(t);

    Eigen::Matrix<double, 16, 16> a_loc = Eigen::Matrix<double, 16, 16>::Zero();
    Eigen::Matrix<double, 9, 16> b_loc = Eigen::Matrix<double, 9, 16>::Zero();  // 6 disp rows, 3 rotation rows
    for (std::size_t q = 0; q < ref_rule.size(); ++q) {
      const Vec2& xi = ref_rule.points[q];
      const double w = ref_rule.weights[q] * jac;
      const Vec2 x = v0 + xi(0) * e1 + xi(1) * e2;
      const Eigen::Vector3d lam(1 - xi(0) - xi(1), xi(0), xi(1));
      const auto phi = elements[t].values(x);
      const auto div = elements[t].divergences(x);

      const Eigen::Matrix<double, 8, 8> mass = phi.transpose() * phi;
      for (int r = 0; r < 2; ++r) {
        a_loc.block<8, 8>(8 * r, 8 * r) += w * inv_2mu * mass;
        for (int s = 0; s < 2; ++s) {
          a_loc.block<8, 8>(8 * r, 8 * s) -= w * inv_2mu * coupling * phi.row(r).transpose() * phi.row(s);
        }
      }
      for (int k = 0; k < 3; ++k) {
        for (int c = 0; c < 2; ++c) b_loc.block<1, 8>(2 * k + c, 8 * c) += w * lam(k) * div;
        // p (tau_21 - tau_12): row 1 x-component minus row 0 y-component.
        b_loc.block<1, 8>(6 + k, 8) += w * lam(k) * phi.row(0);
        b_loc.block<1, 8>(6 + k, 0) -= w * lam(k) * phi.row(1);
      }
      const Vec2 force = loads.body_force(x);
      for (int k = 0; k < 3; ++k) {
        for (int c = 0; c < 2; ++c) h_full(layout.disp_dof(t, k, c)) -= w * force(c) * lam(k);
      }
    }

    std::array<Index, 16> sdofs{};
    for (int r = 0; r < 2; ++r) {
      for (int i = 0; i < 8; ++i) sdofs[8 * r + i] = local_stress_dof(mesh, layout, r, t, i);
    }
    std::array<Index, 9> mdofs{};
    for (int k = 0; k < 3; ++k) {
      mdofs[2 * k] = layout.disp_dof(t, k, 0);
      mdofs[2 * k + 1] = layout.disp_dof(t, k, 1);
      mdofs[6 + k] = layout.rot_dof(tri[k]);
    }
    for (int i = 0; i < 16; ++i) {
      for (int j = 0; j < 16; ++j) a_trip.emplace_back(sdofs[i], sdofs[j], a_loc(i, j));
      for (int k = 0; k < 9; ++k) b_trip.emplace_back(mdofs[k], sdofs[i], b_loc(k, i));
    }
  }

  SaddleSystem sys;
  sys.layout = layout;
  sys.material = mat;
  sys.A_full.resize(n, n);
  sys.A_full.setFromTriplets(a_trip.begin(), a_trip.end());
  sys.B_full.resize(m, n);
  sys.B_full.setFromTriplets(b_trip.begin(), b_trip.end());
  sys.h_full = h_full;

  // Boundary terms: f_a on Dirichlet edges, prescribed edge moments on Neumann edges.
  sys.f_full = VectorXd::Zero(n);
  sys.fixed_values = VectorXd::Zero(n);
  const auto line = gauss_legendre_unit<double>(4);
  for (int e : mesh.boundary_edges) {
    const Edge& edge = mesh.edges[e];
    const Vec2& p0 = mesh.vertices[edge.vertices[0]];
    const Vec2& p1 = mesh.vertices[edge.vertices[1]];
    const int t = edge.triangles[0];
    int l = 0;
    while (mesh.triangle_edges[t][l] != e) ++l;
    for (std::size_t q = 0; q < line.size(); ++q) {
      const double s = line.points[q](0);
      const double w = line.weights[q] * edge.length;
      const Vec2 x = p0 + s * (p1 - p0);
      if (mesh.label(e) == BoundaryLabel::Dirichlet) {
        const Vec2 g = loads.dirichlet(x);
        const auto flux = (edge.normal.transpose() * elements[t].values(x)).eval();
        for (int r = 0; r < 2; ++r) {
          for (int k = 0; k < 2; ++k) {
            sys.f_full(local_stress_dof(mesh, layout, r, t, 2 * l + k)) += w * flux(2 * l + k) * g(r);
          }
        }
      } else {
        const Vec2 g = loads.neumann(x);
        for (int r = 0; r < 2; ++r) {
          sys.fixed_values(layout.stress_edge_dof(r, e, 0)) += w * g(r) * (1 - s);
          sys.fixed_values(layout.stress_edge_dof(r, e, 1)) += w * g(r) * s;
        }
      }
    }
  }

  free_dof_maps(layout, sys.free_dofs, sys.full_to_free);
  const auto all_m = iota_indices(m);
  sys.op = SaddleOperator(select(sys.A_full, sys.free_dofs, sys.free_dofs), select(sys.B_full, all_m, sys.free_dofs));
  const VectorXd a_fixed = sys.A_full * sys.fixed_values;
  sys.f.resize(sys.n_free());
  for (Index i = 0; i < sys.n_free(); ++i) sys.f(i) = sys.f_full(sys.free_dofs[i]) - a_fixed(sys.free_dofs[i]);
  sys.h = sys.h_full - sys.B_full * sys.fixed_values;
  return sys;
}

SpMat saddle_matrix(const SaddleOperator& op) {
  const Index n = op.n();
  const Index m = op.m();
  std::vector<Triplet> t;
  t.reserve(op.A.nonZeros() + 2 * op.B.nonZeros());
  for (Index j = 0; j < n; ++j) {
    for (SpMat::InnerIterator it(op.A, j); it; ++it) t.emplace_back(it.row(), j, it.value());
    for (SpMat::InnerIterator it(op.B, j); it; ++it) {
      t.emplace_back(n + it.row(), j, it.value());
      t.emplace_back(j, n + it.row(), it.value());
    }
  }
  SpMat k(n + m, n + m);
  k.setFromTriplets(t.begin(), t.end());
  k.makeCompressed();
  return k;
}

SaddleFactorization::SaddleFactorization(const SaddleOperator& op)
    : n_(op.n()), m_(op.m()), lu_(std::make_unique<Eigen::SparseLU<SpMat>>()) {
  const SpMat k = saddle_matrix(op);
  lu_->analyzePattern(k);
  lu_->factorize(k);
  if (lu_->info() != Eigen::Success) throw Error("SaddleFactorization: factorization failed: " + lu_->lastErrorMessage());
}

VectorXd SaddleFactorization::solve(const VectorXd& f, const VectorXd& h) const {
  VectorXd rhs(n_ + m_);
  rhs << f, h;
  VectorXd x = lu_->solve(rhs);
  if (lu_->info() != Eigen::Success) throw Error("SaddleFactorization: solve failed");
  return x;
}

VectorXd direct_solve(const SaddleOperator& op, const VectorXd& f, const VectorXd& h) {
  return SaddleFactorization(op).solve(f, h);
}

PivotReport saddle_pivot_report(const SaddleOperator& op) {
  const MatrixXd k = MatrixXd(saddle_matrix(op));
  Eigen::FullPivLU<MatrixXd> lu(k);
  PivotReport report;
  report.size = k.rows();
  report.rank = lu.rank();
  const VectorXd pivots = lu.matrixLU().diagonal().cwiseAbs();
  report.max_pivot = pivots.maxCoeff();
  report.min_pivot = pivots.minCoeff();
  return report;
}

}  // namespace dualmg
