// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "dualmg/experiment.hpp"
#include "dualmg/problems.hpp"
#include "support.hpp"

using namespace dualmg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* id, const char* title, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.pass) ++failures;
  std::printf("%s [%s] %s: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", id, title, out.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

Outcome fan_counts() {
  const Mesh mesh = unit_square_mesh(2, test::all(BoundaryLabel::Neumann));
  const DofLayout layout = build_layout(mesh);
  const SaddleSystem sys = assemble(mesh, layout, {1, 1}, Loads{});
  const LevelDofs level{&mesh, &layout, &sys.full_to_free};
  const Residuals r = residuals(sys, VectorXd::Zero(sys.n_free()), VectorXd::Zero(sys.m()));
  struct Row {
    int node;
    std::size_t elements;
    Index n, m;
  };
  bool ok = true;
  std::string detail;
  Index diff = -1;
  for (const Row& row : {Row{2, 1, 4, 9}, Row{0, 2, 12, 16}, Row{1, 3, 20, 23}}) {
    const Patch patch = node_patch(mesh, row.node);
    const LocalProblem l = extract_local(sys.op, level, patch, LocalBc::Neumann, r.r_a, r.r_b);
    ok = ok && patch.elements.size() == row.elements && l.n_ext() == 0 && l.n_int() == row.n && l.n_mult() == row.m;
    detail += "(" + std::to_string(l.n_int()) + "," + std::to_string(l.n_mult()) + ") ";
    diff = l.n_mult() - l.n_int();
  }
  ok = ok && diff == 3;
  return {ok, detail + "m-n=" + std::to_string(diff)};
}

Outcome compliance_kernel() {
  double worst_kernel = 0, worst_ratio = 0;
  const auto identity = [](const Vec2&) { return Mat2::Identity().eval(); };
  const auto trace_free = [](const Vec2&) { return Mat2(Mat2{{1, 0.5}, {-0.5, -1}}); };
  std::vector<Mesh> meshes{cook_problem(0).coarse(), face_problem(0).coarse(),
                           test::skewed_mesh(test::left_bottom_dirichlet())};
  for (const Mesh& mesh : meshes) {
    const DofLayout layout = build_layout(mesh);
    const VectorXd id = interpolate_stress(mesh, layout, identity);
    const SaddleSystem inf = assemble(mesh, layout, {1, MaterialParams::kIncompressible}, Loads{});
    worst_kernel = std::max(worst_kernel, (inf.A_full * (2.5 * id)).norm() / (inf.A_full.norm() * 2.5 * id.norm()));

    const SaddleSystem big = assemble(mesh, layout, {1, 1e6}, Loads{});
    const VectorXd dev = interpolate_stress(mesh, layout, trace_free);
    worst_ratio = std::max(worst_ratio, id.dot(big.A_full * id) / dev.dot(big.A_full * dev));
  }
  return {worst_kernel <= 1e-12 && worst_ratio <= 1e-5,
          "|A I|/(|A||I|) = " + fmt(worst_kernel) + ", energy ratio at 1e6 = " + fmt(worst_ratio)};
}

Outcome galerkin_consistency() {
  Loads loads;
  loads.body_force = [](const Vec2& x) { return Vec2(1 - x(1), x(0)); };
  double worst = 0;
  int pairs = 0;
  for (double lambda : {1.0, MaterialParams::kIncompressible}) {
    const MaterialParams mat{1, lambda};
    const Hierarchy h(unit_square_mesh(2, test::left_bottom_dirichlet()), 2, mat, loads, {});
    for (int j = 0; j < h.finest(); ++j) {
      const Mesh& mesh = h.meshes().meshes[j];
      const SaddleSystem direct = assemble(mesh, build_layout(mesh), mat, loads);
      const SaddleOperator g = galerkin(h.level(j + 1).op, h.transfer(j));
      worst = std::max({worst, test::relative_frobenius(g.A, direct.op.A), test::relative_frobenius(g.B, direct.op.B)});
      ++pairs;
    }
  }
  return {pairs >= 2 && worst <= 1e-10, std::to_string(pairs) + " level pairs, worst " + fmt(worst)};
}

Outcome robin_identities() {
  Problem cook = cook_problem(0, 3);
  const Mesh& mesh = cook.coarse();
  const DofLayout layout = build_layout(mesh);
  const SaddleSystem sys = assemble(mesh, layout, {1, 1}, cook.spec.loads);
  const LevelDofs level{&mesh, &layout, &sys.full_to_free};
  const auto patches = build_patches(mesh);

  VectorXd y1 = VectorXd::Zero(sys.n_free()), z1 = VectorXd::Zero(sys.m());
  const Residuals r0 = residuals(sys, y1, z1);
  double g_norm = 0;
  for (const Patch& p : patches) {
    g_norm += robin_matrix(extract_local(sys.op, level, p, LocalBc::Robin, r0.r_a, r0.r_b), 0).cwiseAbs().sum();
  }

  VectorXd y2 = y1, z2 = z1;
  const PatchSmoother robin(sys.op, level, patches, {LocalBc::Robin, 0});
  const PatchSmoother dirichlet(sys.op, level, patches, {LocalBc::Dirichlet, 0});
  bool identical = true;
  for (int s = 0; s < 5; ++s) {
    const Residuals a = robin.sweep(sys.op, sys.f, sys.h, y1, z1);
    const Residuals b = dirichlet.sweep(sys.op, sys.f, sys.h, y2, z2);
    identical = identical && a.norm == b.norm;
  }
  identical = identical && (y1.array() == y2.array()).all() && (z1.array() == z2.array()).all();

  double lumping = 0;
  for (double alpha : {0.1, 1.0, 7.0}) {
    const DualPoissonSystem dp = dual_poisson_robin(unit_square_mesh(4, test::all(BoundaryLabel::Neumann)), alpha);
    const VectorXd g = dp.lumped_diagonal(), beta = dp.lumping_coefficients();
    const VectorXd sums = dp.M * VectorXd::Ones(dp.n());
    for (std::size_t k = 0; k < dp.ext.size(); ++k) {
      lumping = std::max(lumping, std::abs(beta(k) * sums(dp.ext[k]) - g(k)) / g(k));
    }
  }
  return {g_norm == 0 && identical && lumping == 0,
          "sum|G(0)| = " + fmt(g_norm) + ", Robin(0) == Dirichlet: " + (identical ? "yes" : "no") +
              ", lumping error = " + fmt(lumping)};
}

RunConfig cook_smoothing(LocalBc bc, const std::string& lambda) {
  RunConfig c;
  c.problem = ProblemKind::Cook;
  c.mode = RunMode::SmoothOnly;
  c.refinements = 0;
  c.cells = 11;
  c.sweeps = 100;
  c.tol = 0;
  c.bc = bc;
  c.lambda = lambda;
  return c;
}

Outcome smoother_suite() {
  bool ok_a = true, ok_b = true, ok_c = true;
  std::string detail;
  Index dofs = 0;
  for (const std::string lambda : {"1", "inf"}) {
    const RunResult robin = run_single(cook_smoothing(LocalBc::Robin, lambda), 1);
    dofs = robin.dofs_per_level.back();
    bool monotone = true;
    for (std::size_t i = 1; i < robin.log.size(); ++i) monotone = monotone && robin.log[i].res < robin.log[i - 1].res;
    const double reduction_a = robin.log.front().res / robin.log.back().res;
    ok_a = ok_a && monotone && reduction_a >= 1e2 && robin.log.size() == 101;

    const RunResult rbm = run_single(cook_smoothing(LocalBc::NeumannRemoveRBM, lambda), 0);
    const double reduction_b = rbm.log.front().res / rbm.log.back().res;
    ok_b = ok_b && std::isfinite(reduction_b) && reduction_b < 10;

    const RunResult avg = run_single(cook_smoothing(LocalBc::NeumannZeroAverage, lambda), 0);
    const double split = avg.log.back().res_b / avg.log.back().res_a;
    ok_c = ok_c && split >= 10;

    detail += "lambda=" + lambda + ": (a) " + (monotone ? "monotone" : "not monotone") + " reduction " +
              fmt(reduction_a) + ", (b) reduction " + fmt(reduction_b) + ", (c) |r_b|/|r_a| " + fmt(split) + "; ";
  }
  detail += std::to_string(dofs) + " dofs; a " + (ok_a ? "ok" : "fails") + ", b " + (ok_b ? "ok" : "fails") + ", c " +
            (ok_c ? "ok" : "fails");
  return {ok_a && ok_b && ok_c, detail};
}

RunConfig cook_cycles(RunMode mode, int refinements) {
  RunConfig c;
  c.problem = ProblemKind::Cook;
  c.mode = mode;
  c.refinements = refinements;
  c.cells = 4;
  c.lambda = "inf";
  return c;
}

Outcome vcycle_optimality() {
  bool ok = true;
  std::string detail;
  for (double alpha : {0.0, 1.0}) {
    const RunResult r2 = run_single(cook_cycles(RunMode::VCycle, 2), alpha);
    const RunResult r3 = run_single(cook_cycles(RunMode::VCycle, 3), alpha);
    ok = ok && r2.converged && r3.converged && std::abs(r2.iterations - r3.iterations) <= 2;
    detail += "alpha=" + fmt(alpha) + ": " + std::to_string(r2.iterations) + "/" + std::to_string(r3.iterations) +
              " cycles at " + std::to_string(r2.dofs_per_level.back()) + "/" +
              std::to_string(r3.dofs_per_level.back()) + " dofs; ";
  }
  const RunResult bad = run_single(cook_cycles(RunMode::VCycle, 3), 100);
  ok = ok && !bad.converged && bad.iterations <= 50;
  detail += "alpha=100 " + std::string(bad.converged ? "converged" : "flagged non-converged") + " after " +
            std::to_string(bad.iterations) + " cycles";
  return {ok, detail};
}

Outcome two_grid_sensitivity() {
  bool ok = true;
  std::string detail;
  const int finest = 4;
  for (int r = 2; r <= finest; ++r) {
    const RunResult cook = run_single(cook_cycles(RunMode::TwoGrid, r), 1);
    RunConfig fc;
    fc.problem = ProblemKind::Face;
    fc.mode = RunMode::TwoGrid;
    fc.refinements = r;
    const RunResult face = run_single(fc, 0.1);
    ok = ok && cook.converged && face.converged && cook.contraction <= 0.9 && face.contraction <= 0.9;
    detail += "refine " + std::to_string(r) + ": cook " + fmt(cook.contraction) + ", face " + fmt(face.contraction) + "; ";
  }
  for (ProblemKind kind : {ProblemKind::Cook, ProblemKind::Face}) {
    RunConfig c = kind == ProblemKind::Cook ? cook_cycles(RunMode::TwoGrid, finest) : RunConfig{};
    c.problem = kind;
    c.mode = RunMode::TwoGrid;
    c.refinements = finest;
    c.tol = 1e-4;
    c.max_cycles = 100;
    const RunResult zero = run_single(c, 0);
    ok = ok && !zero.converged;
    detail += to_string(kind) + " alpha=0 " + (zero.converged ? "reached" : "missed") + " 1e-4; ";
  }
  return {ok, detail};
}

Outcome convergence_oracle() {
  const MaterialParams mat{1, 1};
  const auto sol = manufactured_solution(mat);
  std::vector<double> errors;
  for (int r = 0; r <= 3; ++r) {
    const Problem p = manufactured_elasticity(r, mat);
    const Mesh& mesh = p.finest();
    const DofLayout layout = build_layout(mesh);
    const SaddleSystem sys = assemble(mesh, layout, mat, p.spec.loads);
    const VectorXd x = direct_solve(sys.op, sys.f, sys.h);
    errors.push_back(stress_l2_error(mesh, layout, sys.expand_stress(x.head(sys.n_free())), sol.stress));
  }
  bool ok = true;
  std::string detail = "orders";
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double order = std::log2(errors[i - 1] / errors[i]);
    ok = ok && std::abs(order - 2) <= 0.3;
    detail += " " + fmt(order);
  }

  const Problem p = manufactured_elasticity(0, mat);
  const Hierarchy h(p.coarse(), 3, mat, p.spec.loads, {LocalBc::Robin, 1});
  CycleConfig config;
  config.tol = 1e-10;
  const SolveResult s = solve(h, config);
  const SaddleSystem& fine = h.fine_system();
  const VectorXd x = direct_solve(fine.op, fine.f, fine.h);
  VectorXd mg(x.size());
  mg << s.y, s.z;
  const double rel = (mg - x).norm() / x.norm();
  ok = ok && s.converged && rel <= 1e-6;
  detail += "; multigrid vs direct " + fmt(rel) + " after " + std::to_string(s.cycles) + " cycles";
  return {ok, detail};
}

Outcome solvability() {
  bool ok = true;
  std::string detail;
  const std::vector<std::pair<std::string, Problem>> problems{{"cook", cook_problem(0)}, {"face", face_problem(0)}};
  for (const auto& [name, problem] : problems) {
    const Mesh& mesh = problem.coarse();
    const DofLayout layout = build_layout(mesh);
    for (double lambda : {1.0, MaterialParams::kIncompressible}) {
      const SaddleSystem sys = assemble(mesh, layout, {1, lambda}, problem.spec.loads);
      const PivotReport rep = saddle_pivot_report(sys.op);
      ok = ok && rep.rank == rep.size && rep.min_pivot > 1e-10 * rep.max_pivot;
      detail += name + " lambda=" + fmt(lambda) + ": rank " + std::to_string(rep.rank) + "/" +
                std::to_string(rep.size) + ", min/max pivot " + fmt(rep.ratio()) + "; ";
    }
  }
  return {ok, detail};
}

}  // namespace

int main() {
  report("1", "local dof counts of 1, 2 and 3 element fans", fan_counts);
  report("2", "incompressible compliance kernel", compliance_kernel);
  report("3", "Galerkin consistency", galerkin_consistency);
  report("4", "Robin identities", robin_identities);
  report("5", "smoother qualitative suite on Cook", smoother_suite);
  report("6", "V-cycle optimality on Cook", vcycle_optimality);
  report("7", "two-grid alpha sensitivity", two_grid_sensitivity);
  report("8", "convergence order and multigrid vs direct", convergence_oracle);
  report("9", "solvability of the coarse saddle systems", solvability);
  std::printf("%s: %d failing criteria\n", failures == 0 ? "PASS" : "FAIL", failures);
  return failures == 0 ? 0 : 1;
}
