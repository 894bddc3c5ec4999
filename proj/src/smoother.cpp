// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dualmg/smoother.hpp"

#include <algorithm>
#include <set>

namespace dualmg {

namespace {

constexpr double kSingularPivotTolerance = 1e-12;

// Dense block m(rows, cols); `row_map` is a scratch array of size m.rows()
// filled with -1 on entry and restored on exit.
MatrixXd dense_block(const SpMat& m, const std::vector<Index>& rows, const std::vector<Index>& cols,
                     std::vector<Index>& row_map) {
  MatrixXd out = MatrixXd::Zero(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) row_map[rows[i]] = static_cast<Index>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (SpMat::InnerIterator it(m, cols[j]); it; ++it) {
      const Index i = row_map[it.row()];
      if (i >= 0) out(i, static_cast<Index>(j)) = it.value();
    }
  }
  for (Index r : rows) row_map[r] = -1;
  return out;
}

VectorXd gather(const VectorXd& v, const std::vector<Index>& idx) {
  VectorXd out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = v(idx[i]);
  return out;
}

bool uses_boundary_dofs(LocalBc bc) { return bc == LocalBc::Dirichlet || bc == LocalBc::Robin; }

LocalProblem extract_blocks(const SaddleOperator& op, PatchDofs dofs, std::vector<Index>& stress_map,
                            std::vector<Index>& mult_map) {
  LocalProblem local;
  local.dofs = std::move(dofs);
  const auto& d = local.dofs;
  local.A_ee = dense_block(op.A, d.ext, d.ext, stress_map);
  local.A_ie = dense_block(op.A, d.intr, d.ext, stress_map);
  local.A_ii = dense_block(op.A, d.intr, d.intr, stress_map);
  local.B_ie = dense_block(op.B, d.mult, d.ext, mult_map);
  local.B_ii = dense_block(op.B, d.mult, d.intr, mult_map);
  return local;
}

}  // namespace

std::string to_string(LocalBc bc) {
  switch (bc) {
    case LocalBc::Neumann: return "neumann";
    case LocalBc::NeumannRemoveRBM: return "neumann_remove_rbm";
    case LocalBc::NeumannZeroAverage: return "neumann_zero_average";
    case LocalBc::Dirichlet: return "dirichlet";
    case LocalBc::Robin: return "robin";
  }
  return "unknown";
}

LocalBc local_bc_from_string(const std::string& name) {
  for (LocalBc bc : {LocalBc::Neumann, LocalBc::NeumannRemoveRBM, LocalBc::NeumannZeroAverage, LocalBc::Dirichlet,
                     LocalBc::Robin}) {
    if (to_string(bc) == name) return bc;
  }
  throw Error("unknown local boundary treatment '" + name + "'");
}

void SmootherConfig::validate() const {
  if (!(alpha >= 0)) throw Error("SmootherConfig: alpha must be non-negative");
}

PatchDofs patch_dofs(const LevelDofs& level, const Patch& patch) {
  const Mesh& mesh = *level.mesh;
  const DofLayout& layout = *level.layout;
  const auto& full_to_free = *level.full_to_free;
  if (patch.elements.empty()) throw Error("patch_dofs: empty patch");

  std::vector<int> elements = patch.elements;
  std::sort(elements.begin(), elements.end());
  auto in_patch = [&](int t) { return t >= 0 && std::binary_search(elements.begin(), elements.end(), t); };

  std::set<int> inner_edges, outer_edges, vertices;
  for (int t : elements) {
    for (int l = 0; l < 3; ++l) {
      const int e = mesh.triangle_edges[t][l];
      // Edges on the domain boundary belong to the physical problem, not to
      // the artificial patch boundary.
      const Edge& edge = mesh.edges[e];
      const bool inner = edge.on_boundary() || (in_patch(edge.triangles[0]) && in_patch(edge.triangles[1]));
      (inner ? inner_edges : outer_edges).insert(e);
      vertices.insert(mesh.triangles[t][l]);
    }
  }

  PatchDofs d;
  auto push_free = [&](std::vector<Index>& out, Index dof) {
    if (full_to_free[dof] >= 0) out.push_back(full_to_free[dof]);
  };
  for (int row = 0; row < 2; ++row) {
    for (int e : outer_edges) {
      for (int k = 0; k < 2; ++k) push_free(d.ext, layout.stress_edge_dof(row, e, k));
    }
    for (int e : inner_edges) {
      for (int k = 0; k < 2; ++k) push_free(d.intr, layout.stress_edge_dof(row, e, k));
    }
    for (int t : elements) {
      for (int c = 0; c < 2; ++c) push_free(d.intr, layout.stress_interior_dof(row, t, c));
    }
  }

  for (int t : elements) {
    for (int k = 0; k < 3; ++k) {
      for (int c = 0; c < 2; ++c) d.mult.push_back(layout.disp_dof(t, k, c));
    }
  }
  d.n_disp = static_cast<Index>(d.mult.size());
  for (int v : vertices) d.mult.push_back(layout.rot_dof(v));

  d.average_constraints = MatrixXd::Zero(3, static_cast<Index>(d.mult.size()));
  Index col = 0;
  for (int t : elements) {
    const double third = mesh.area(t) / 3;
    for (int k = 0; k < 3; ++k) {
      for (int c = 0; c < 2; ++c) d.average_constraints(c, col++) = third;
    }
  }
  for (int v : vertices) {
    double weight = 0;
    for (int t : mesh.vertex_triangles[v]) {
      if (in_patch(t)) weight += mesh.area(t) / 3;
    }
    d.average_constraints(2, col++) = weight;
  }
  return d;
}

MatrixXd LocalProblem::saddle() const {
  const Index ne = n_ext(), ni = n_int(), nm = n_mult();
  MatrixXd k = MatrixXd::Zero(ne + ni + nm, ne + ni + nm);
  k.block(0, 0, ne, ne) = A_ee;
  k.block(ne, 0, ni, ne) = A_ie;
  k.block(0, ne, ne, ni) = A_ie.transpose();
  k.block(ne, ne, ni, ni) = A_ii;
  k.block(ne + ni, 0, nm, ne) = B_ie;
  k.block(ne + ni, ne, nm, ni) = B_ii;
  k.block(0, ne + ni, ne, nm) = B_ie.transpose();
  k.block(ne, ne + ni, ni, nm) = B_ii.transpose();
  return k;
}

VectorXd LocalProblem::rhs() const {
  VectorXd r(n_ext() + n_int() + n_mult());
  r << f_ext, f_int, h_loc;
  return r;
}

LocalProblem extract_local(const SaddleOperator& op, const LevelDofs& level, const Patch& patch, LocalBc bc,
                           const VectorXd& r_a, const VectorXd& r_b) {
  PatchDofs dofs = patch_dofs(level, patch);
  if (!uses_boundary_dofs(bc)) dofs.ext.clear();
  std::vector<Index> stress_map(op.n(), -1), mult_map(op.m(), -1);
  LocalProblem local = extract_blocks(op, std::move(dofs), stress_map, mult_map);
  local.f_ext = gather(r_a, local.dofs.ext);
  local.f_int = gather(r_a, local.dofs.intr);
  local.h_loc = gather(r_b, local.dofs.mult);
  return local;
}

VectorXd robin_matrix(const LocalProblem& local, double alpha) {
  const Index ne = local.n_ext();
  VectorXd g = VectorXd::Zero(ne);
  for (Index p = 0; p < ne; ++p) {
    double row_max = local.A_ee.row(p).cwiseAbs().maxCoeff();
    if (local.n_int() > 0) row_max = std::max(row_max, local.A_ie.col(p).cwiseAbs().maxCoeff());
    if (local.n_mult() > 0) row_max = std::max(row_max, local.B_ie.col(p).cwiseAbs().maxCoeff());
    g(p) = alpha * row_max;
  }
  return g;
}

SingularLocalSystem::SingularLocalSystem(Index size_, Index rank_)
    : Error("singular local system: size " + std::to_string(size_) + ", rank " + std::to_string(rank_)),
      size(size_),
      rank(rank_) {}

LocalSolver::LocalSolver(const LocalProblem& local, const SmootherConfig& config)
    : bc_(config.bc), n_loc_(local.n_ext() + local.n_int()), m_loc_(local.n_mult()) {
  config.validate();
  if (n_loc_ == 0) throw Error("LocalSolver: patch has no free stress dofs");
  MatrixXd k = local.saddle();
  const Index size = n_loc_ + m_loc_;
  switch (bc_) {
    case LocalBc::Robin:
      k.topLeftCorner(local.n_ext(), local.n_ext()).diagonal() += robin_matrix(local, config.alpha);
      [[fallthrough]];
    case LocalBc::Dirichlet:
    case LocalBc::Neumann:
      kept_ = iota_indices(size);
      matrix_ = std::move(k);
      break;
    case LocalBc::NeumannRemoveRBM: {
      if (local.dofs.n_disp < 2 || m_loc_ - local.dofs.n_disp < 1) throw Error("LocalSolver: patch too small for RBM removal");
      for (Index i = 0; i < size; ++i) {
        if (i == n_loc_ || i == n_loc_ + 1 || i == size - 1) continue;
        kept_.push_back(i);
      }
      matrix_ = k(kept_, kept_);
      break;
    }
    case LocalBc::NeumannZeroAverage: {
      kept_ = iota_indices(size);
      matrix_ = MatrixXd::Zero(size + 3, size + 3);
      matrix_.topLeftCorner(size, size) = k;
      matrix_.block(size, n_loc_, 3, m_loc_) = local.dofs.average_constraints;
      matrix_.block(n_loc_, size, m_loc_, 3) = local.dofs.average_constraints.transpose();
      break;
    }
  }
  lu_.setThreshold(kSingularPivotTolerance);
  lu_.compute(matrix_);
  if (lu_.rank() < matrix_.rows()) throw SingularLocalSystem(matrix_.rows(), lu_.rank());
}

LocalCorrection LocalSolver::solve(const VectorXd& rhs) const {
  VectorXd reduced = VectorXd::Zero(matrix_.rows());
  for (std::size_t i = 0; i < kept_.size(); ++i) reduced(static_cast<Index>(i)) = rhs(kept_[i]);
  const VectorXd sol = lu_.solve(reduced);
  VectorXd full = VectorXd::Zero(n_loc_ + m_loc_);
  for (std::size_t i = 0; i < kept_.size(); ++i) full(kept_[i]) = sol(static_cast<Index>(i));
  return {full.head(n_loc_), full.tail(m_loc_)};
}

LocalCorrection local_solve(const LocalProblem& local, const SmootherConfig& config) {
  return LocalSolver(local, config).solve(local.rhs());
}

PatchSmoother::PatchSmoother(const SaddleOperator& op, const LevelDofs& level, std::vector<Patch> patches,
                             const SmootherConfig& config)
    : config_(config), patches_(std::move(patches)) {
  config_.validate();
  std::sort(patches_.begin(), patches_.end(),
            [](const Patch& a, const Patch& b) { return a.anchor_node < b.anchor_node; });
  std::vector<Index> stress_map(op.n(), -1), mult_map(op.m(), -1);
  dofs_.reserve(patches_.size());
  solvers_.reserve(patches_.size());
  for (const Patch& patch : patches_) {
    PatchDofs d = patch_dofs(level, patch);
    if (!uses_boundary_dofs(config_.bc)) d.ext.clear();
    const LocalProblem local = extract_blocks(op, std::move(d), stress_map, mult_map);
    solvers_.emplace_back(local, config_);
    dofs_.push_back(local.dofs);
  }
}

void PatchSmoother::apply_patch(std::size_t index, const SaddleOperator& op, VectorXd& y, VectorXd& z, VectorXd& r_a,
                                VectorXd& r_b) const {
  const PatchDofs& d = dofs_[index];
  const Index ne = static_cast<Index>(d.ext.size());
  const Index ni = static_cast<Index>(d.intr.size());
  const Index nm = static_cast<Index>(d.mult.size());
  VectorXd rhs(ne + ni + nm);
  for (Index i = 0; i < ne; ++i) rhs(i) = r_a(d.ext[i]);
  for (Index i = 0; i < ni; ++i) rhs(ne + i) = r_a(d.intr[i]);
  for (Index i = 0; i < nm; ++i) rhs(ne + ni + i) = r_b(d.mult[i]);

  const LocalCorrection c = solvers_[index].solve(rhs);

  auto update_stress = [&](Index dof, double delta) {
    if (delta == 0) return;
    y(dof) += delta;
    for (SpMat::InnerIterator it(op.A, dof); it; ++it) r_a(it.row()) -= it.value() * delta;
    for (SpMat::InnerIterator it(op.B, dof); it; ++it) r_b(it.row()) -= it.value() * delta;
  };
  for (Index i = 0; i < ne; ++i) update_stress(d.ext[i], c.y(i));
  for (Index i = 0; i < ni; ++i) update_stress(d.intr[i], c.y(ne + i));
  for (Index i = 0; i < nm; ++i) {
    const double delta = c.z(i);
    if (delta == 0) continue;
    z(d.mult[i]) += delta;
    for (SpMatRow::InnerIterator it(op.B_rows, d.mult[i]); it; ++it) r_a(it.col()) -= it.value() * delta;
  }
}

Residuals PatchSmoother::sweep(const SaddleOperator& op, const VectorXd& f, const VectorXd& h, VectorXd& y,
                               VectorXd& z) const {
  Residuals r = residuals(op, f, h, y, z);
  for (std::size_t p = 0; p < patches_.size(); ++p) apply_patch(p, op, y, z, r.r_a, r.r_b);
  return residuals(op, f, h, y, z);
}

Residuals sweep(const SaddleSystem& system, const Mesh& mesh, const std::vector<Patch>& patches,
                const SmootherConfig& config, VectorXd& y, VectorXd& z) {
  const LevelDofs level{&mesh, &system.layout, &system.full_to_free};
  return PatchSmoother(system.op, level, patches, config).sweep(system.op, system.f, system.h, y, z);
}

}  // namespace dualmg
