// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/LU>
#include <array>
#include <cmath>

#include "dualmg/multigrid.hpp"
#include "dualmg/problems.hpp"
#include "support.hpp"

using namespace dualmg;

namespace {

const MaterialParams kUnit{1, 1};

Loads some_loads() {
  Loads loads;
  loads.body_force = [](const Vec2& x) { return Vec2(1 - x(1), x(0)); };
  loads.dirichlet = [](const Vec2& x) { return Vec2(0.0, 0.1 * x(0) * x(0)); };
  loads.neumann = [](const Vec2& x) { return Vec2(0.0, x(1)); };
  return loads;
}

Mesh square(int cells = 2) { return unit_square_mesh(cells, test::left_bottom_dirichlet()); }

MatrixXd block_diag(const SpMat& a, const SpMat& b) {
  MatrixXd out = MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = MatrixXd(a);
  out.bottomRightCorner(b.rows(), b.cols()) = MatrixXd(b);
  return out;
}

}  // namespace

TEST_CASE("Galerkin operators match direct assembly on every level pair") {
  const Hierarchy h(square(), 2, kUnit, some_loads(), {LocalBc::Robin, 1});
  REQUIRE(h.num_levels() == 3);
  for (int j = 0; j < h.finest(); ++j) {
    const Mesh& mesh = h.meshes().meshes[j];
    const SaddleSystem direct = assemble(mesh, build_layout(mesh), kUnit, some_loads());
    CHECK(test::relative_frobenius(h.level(j).op.A, direct.op.A) < 1e-10);
    CHECK(test::relative_frobenius(h.level(j).op.B, direct.op.B) < 1e-10);

    const SaddleOperator g = galerkin(h.level(j + 1).op, h.transfer(j));
    CHECK(test::relative_frobenius(h.level(j).op.A, g.A) < 1e-10);
    CHECK(test::relative_frobenius(h.level(j).op.B, g.B) < 1e-10);
    CHECK(h.level(j).op.n() == direct.n_free());
    CHECK(h.level(j).op.m() == direct.m());
  }
}

TEST_CASE("Galerkin consistency on the Cook membrane at lambda = inf") {
  const Problem cook = cook_problem(0, 2);
  const MaterialParams mat{1, MaterialParams::kIncompressible};
  const Hierarchy h(cook.coarse(), 1, mat, cook.spec.loads, {LocalBc::Robin, 1});
  const SaddleSystem direct = assemble(cook.coarse(), build_layout(cook.coarse()), mat, cook.spec.loads);
  CHECK(test::relative_frobenius(h.level(0).op.A, direct.op.A) < 1e-10);
  CHECK(test::relative_frobenius(h.level(0).op.B, direct.op.B) < 1e-10);
}

TEST_CASE("dof counts follow the refinement recurrences") {
  const Hierarchy h(square(), 2, kUnit, Loads{}, {});
  for (int j = 0; j < h.num_levels(); ++j) {
    const Mesh& mesh = *h.level(j).mesh;
    const DofLayout& l = h.level(j).layout;
    CHECK(h.level(j).size() ==
          l.n_stress() - static_cast<Index>(l.constrained.size()) + 6 * mesh.num_triangles() + mesh.num_vertices());
  }
}

TEST_CASE("the coarsest solve is exact") {
  const Hierarchy h(square(), 1, kUnit, some_loads(), {});
  const SaddleOperator& op = h.level(0).op;
  const VectorXd f = test::random_vector(op.n(), 1), g = test::random_vector(op.m(), 2);
  const VectorXd x = h.coarse_solver().solve(f, g);
  const Residuals r = residuals(op, f, g, x.head(op.n()), x.tail(op.m()));
  CHECK(r.norm <= 1e-10 * (f.norm() + g.norm()));
}

TEST_CASE("zero data stays zero") {
  const Hierarchy h(square(), 2, kUnit, Loads{}, {});
  VectorXd y = VectorXd::Zero(h.fine_system().n_free()), z = VectorXd::Zero(h.fine_system().m());
  v_cycle(h, y, z, {}, 1);
  CHECK(y.norm() == 0);
  CHECK(z.norm() == 0);
}

TEST_CASE("with one refinement the two-grid cycle is the V-cycle") {
  const Hierarchy h(square(), 1, kUnit, some_loads(), {LocalBc::Robin, 1});
  VectorXd y1 = VectorXd::Zero(h.fine_system().n_free()), z1 = VectorXd::Zero(h.fine_system().m());
  VectorXd y2 = y1, z2 = z1;
  ResidualLog l1, l2;
  for (int c = 1; c <= 2; ++c) {
    v_cycle(h, y1, z1, {}, c, &l1);
    two_grid(h, y2, z2, {}, c, &l2);
  }
  CHECK((y1.array() == y2.array()).all());
  CHECK((z1.array() == z2.array()).all());
  REQUIRE(l1.size() == l2.size());
  for (std::size_t i = 0; i < l1.size(); ++i) CHECK(l1[i].res == l2[i].res);
}

TEST_CASE("coarse correction alone is the Galerkin projector") {
  const Hierarchy h(square(), 1, kUnit, some_loads(), {});
  const SaddleSystem& fine = h.fine_system();
  CycleConfig config;
  config.pre_smooth = config.post_smooth = 0;
  VectorXd y = test::random_vector(fine.n_free(), 5), z = test::random_vector(fine.m(), 6);
  const Residuals r0 = residuals(fine, y, z);
  v_cycle(h, y, z, config, 1);

  // r_after = (I - K P (P^T K P)^-1 P^T) r_before, dense
  const MatrixXd k = MatrixXd(saddle_matrix(fine.op));
  const MatrixXd p = block_diag(h.transfer(0).Pi, h.transfer(0).Q);
  const MatrixXd kc = p.transpose() * k * p;
  const VectorXd r = r0.full();
  const VectorXd expected = r - k * p * kc.fullPivLu().solve(p.transpose() * r);
  CHECK((residuals(fine, y, z).full() - expected).norm() <= 1e-10 * r.norm());
}

TEST_CASE("the cycle is a fixed linear iteration") {
  const Hierarchy loaded(square(), 2, kUnit, some_loads(), {LocalBc::Robin, 1});
  const Hierarchy homogeneous(square(), 2, kUnit, Loads{}, {LocalBc::Robin, 1});
  const Index n = loaded.fine_system().n_free(), m = loaded.fine_system().m();
  VectorXd y1 = test::random_vector(n, 1), z1 = test::random_vector(m, 2);
  VectorXd y2 = test::random_vector(n, 3), z2 = test::random_vector(m, 4);
  VectorXd ye = y1 - y2, ze = z1 - z2;
  v_cycle(loaded, y1, z1, {}, 1);
  v_cycle(loaded, y2, z2, {}, 1);
  v_cycle(homogeneous, ye, ze, {}, 1);
  CHECK((y1 - y2 - ye).norm() <= 1e-10 * (y1.norm() + ye.norm()));
  CHECK((z1 - z2 - ze).norm() <= 1e-10 * (z1.norm() + ze.norm()));
}

TEST_CASE("solve matches the direct solution") {
  const Problem p = manufactured_elasticity(2, kUnit);
  const Hierarchy h(p.coarse(), 2, kUnit, p.spec.loads, {LocalBc::Robin, 1});
  const SaddleSystem& fine = h.fine_system();
  const SolveResult s = solve(h, {});
  CHECK(s.converged);
  const VectorXd x = direct_solve(fine.op, fine.f, fine.h);
  const VectorXd dy = s.y - x.head(fine.n_free());
  const VectorXd y = x.head(fine.n_free());
  const double energy_error = std::sqrt(dy.dot(fine.op.A * dy));
  const double energy = std::sqrt(y.dot(fine.op.A * y));
  CHECK(energy_error <= 1e-6 * energy);
  CHECK((s.z - x.tail(fine.m())).norm() <= 1e-6 * x.tail(fine.m()).norm());
}

TEST_CASE("solve bookkeeping") {
  const Hierarchy h(square(), 2, kUnit, some_loads(), {LocalBc::Robin, 1});
  SUBCASE("no cycles") {
    CycleConfig config;
    config.max_cycles = 0;
    const SolveResult s = solve(h, config);
    CHECK_FALSE(s.converged);
    CHECK(s.cycles == 0);
    CHECK(s.y.norm() == 0);
    CHECK(s.log.size() == 1);
    CHECK(s.contraction() == 0);
  }
  SUBCASE("event order and determinism") {
    const SolveResult a = solve(h, {});
    const SolveResult b = solve(h, {});
    REQUIRE(a.log.size() == b.log.size());
    CHECK(a.log.front().event == LogEvent::Initial);
    CHECK(a.log.size() == 1 + 3 * static_cast<std::size_t>(a.cycles));
    for (std::size_t i = 1; i < a.log.size(); ++i) {
      const LogEntry& e = a.log[i];
      CHECK(e.cycle == static_cast<int>((i - 1) / 3 + 1));
      CHECK(e.event == std::array{LogEvent::Pre, LogEvent::Coarse, LogEvent::Post}[(i - 1) % 3]);
      CHECK(std::isfinite(e.res));
      CHECK(e.res == b.log[i].res);
    }
    CHECK(a.converged);
    CHECK(a.final_residual <= 1e-8 * a.initial_residual);
    CHECK(a.contraction() < 1);
  }
  SUBCASE("stand-alone smoothing logs every sweep") {
    const Index n = h.fine_system().n_free(), m = h.fine_system().m();
    const SolveResult s = smooth(h, 4, VectorXd::Zero(n), VectorXd::Zero(m));
    REQUIRE(s.log.size() == 5);
    for (int i = 1; i <= 4; ++i) CHECK(s.log[i].event == LogEvent::Sweep);
    CHECK(s.cycles == 4);
  }
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(Hierarchy(square(), 0, kUnit, Loads{}, {}), Error);
  CycleConfig config;
  config.pre_smooth = -1;
  CHECK_THROWS_AS(config.validate(), Error);
  config = {};
  config.tol = -1;
  CHECK_THROWS_AS(config.validate(), Error);
  CHECK(to_string(CycleMode::TwoGrid) == "two_grid");
  CHECK(to_string(LogEvent::Coarse) == "coarse");
}
