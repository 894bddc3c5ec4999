// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dualmg/problems.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/LU>

#include "dualmg/quadrature.hpp"

namespace dualmg {

namespace {

constexpr double kGeomTol = 1e-10;

/// Barycentric coordinates of x in triangle t.
Eigen::Vector3d barycentric(const Mesh& mesh, int t, const Vec2& x) {
  const auto& tri = mesh.triangles[t];
  const Vec2& a = mesh.vertices[tri[0]];
  Mat2 J;
  J.col(0) = mesh.vertices[tri[1]] - a;
  J.col(1) = mesh.vertices[tri[2]] - a;
  const Vec2 s = J.partialPivLu().solve(x - a);
  return {1 - s(0) - s(1), s(0), s(1)};
}

bool on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  const double s = (p - a).dot(d) / len2;
  if (s < -kGeomTol || s > 1 + kGeomTol) return false;
  return (p - a - s * d).norm() <= kGeomTol * std::sqrt(len2);
}

SpMat sparse_from(Index rows, Index cols, const std::vector<Triplet>& triplets) {
  SpMat m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

/// [[K, T^T], [T, 0]].
SpMat poisson_saddle(const SpMat& K, const SpMat& T) {
  const Index n = K.rows();
  std::vector<Triplet> trip;
  trip.reserve(K.nonZeros() + 2 * T.nonZeros());
  for (Index c = 0; c < K.outerSize(); ++c)
    for (SpMat::InnerIterator it(K, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (Index c = 0; c < T.outerSize(); ++c) {
    for (SpMat::InnerIterator it(T, c); it; ++it) {
      trip.emplace_back(n + it.row(), it.col(), it.value());
      trip.emplace_back(it.col(), n + it.row(), it.value());
    }
  }
  return sparse_from(n + T.rows(), n + T.rows(), trip);
}

}  // namespace

Mesh quad_mesh(const Vec2& p00, const Vec2& p10, const Vec2& p11, const Vec2& p01, int cells,
               const BoundaryClassifier& classifier) {
  if (cells < 1) throw Error("quad_mesh: cells must be positive");
  std::vector<Vec2> vertices;
  const int n = cells + 1;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double s = double(i) / cells;
      const double t = double(j) / cells;
      vertices.push_back((1 - s) * (1 - t) * p00 + s * (1 - t) * p10 + s * t * p11 + (1 - s) * t * p01);
    }
  }
  std::vector<std::array<int, 3>> triangles;
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      const int a = j * n + i;
      triangles.push_back({a, a + 1, a + n + 1});
      triangles.push_back({a, a + n + 1, a + n});
    }
  }
  return build_mesh(std::move(vertices), std::move(triangles), classifier);
}

Mesh unit_square_mesh(int cells, const BoundaryClassifier& classifier) {
  return quad_mesh({0, 0}, {1, 0}, {1, 1}, {0, 1}, cells, classifier);
}

Problem cook_problem(int refinements, int cells) {
  if (refinements < 0) throw Error("cook_problem: refinements must be non-negative");
  Problem problem;
  ProblemSpec& spec = problem.spec;
  spec.name = "cook";
  spec.material = {1, MaterialParams::kIncompressible};
  spec.classifier = [](const Vec2& x) {
    return std::abs(x(0)) < kGeomTol ? BoundaryLabel::Dirichlet : BoundaryLabel::Neumann;
  };
  spec.loads.neumann = [](const Vec2& x) -> Vec2 {
    if (std::abs(x(0) - 48) < 1e-8) return {0, 0.01};
    return Vec2::Zero();
  };
  const Mesh coarse = quad_mesh({0, 0}, {48, 44}, {48, 60}, {0, 44}, cells, spec.classifier);
  problem.meshes = build_hierarchy_meshes(coarse, refinements);
  return problem;
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& polygon) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[j];
    if ((a(1) > p(1)) != (b(1) > p(1)) && p(0) < (b(0) - a(0)) * (p(1) - a(1)) / (b(1) - a(1)) + a(0)) {
      inside = !inside;
    }
  }
  return inside;
}

std::vector<Hole> default_face_holes() {
  const double h = 1.0 / 6;
  auto rect = [h](int i0, int j0, int i1, int j1) {
    return std::vector<Vec2>{{i0 * h, j0 * h}, {i1 * h, j0 * h}, {i1 * h, j1 * h}, {i0 * h, j1 * h}};
  };
  std::vector<Hole> holes;
  holes.push_back({rect(1, 4, 2, 5), false});
  holes.push_back({rect(4, 4, 5, 5), false});
  holes.push_back({{{2 * h, 3 * h}, {3 * h, 3 * h}, {3 * h, 4 * h}}, true});
  holes.push_back({rect(2, 1, 4, 2), false});
  return holes;
}

Problem face_problem(int refinements, const FaceGeometry& geometry) {
  if (refinements < 0) throw Error("face_problem: refinements must be non-negative");
  if (geometry.cells < 1) throw Error("face_problem: cells must be positive");
  for (const Hole& hole : geometry.holes) {
    if (hole.polygon.size() < 3) throw Error("face_problem: a hole needs at least 3 vertices");
  }
  Problem problem;
  ProblemSpec& spec = problem.spec;
  spec.name = "face";
  spec.material = {1, MaterialParams::kIncompressible};
  const std::vector<Hole> holes = geometry.holes;
  spec.classifier = [holes](const Vec2& x) {
    if (std::abs(x(1)) < kGeomTol) return BoundaryLabel::Dirichlet;
    for (const Hole& hole : holes) {
      if (!hole.dirichlet) continue;
      const auto& poly = hole.polygon;
      for (std::size_t i = 0; i < poly.size(); ++i) {
        if (on_segment(x, poly[i], poly[(i + 1) % poly.size()])) return BoundaryLabel::Dirichlet;
      }
    }
    return BoundaryLabel::Neumann;
  };
  spec.loads.dirichlet = [](const Vec2& x) -> Vec2 {
    if (std::abs(x(1)) < 1e-8) return {0, 0.05 * x(0) * x(0)};
    return Vec2::Zero();
  };

  const Mesh grid = unit_square_mesh(geometry.cells, spec.classifier);
  std::vector<int> keep_vertex(grid.num_vertices(), -1);
  std::vector<std::array<int, 3>> triangles;
  for (int t = 0; t < grid.num_triangles(); ++t) {
    const Vec2 c = grid.centroid(t);
    const bool removed = std::any_of(holes.begin(), holes.end(),
                                     [&](const Hole& hole) { return point_in_polygon(c, hole.polygon); });
    if (!removed) triangles.push_back(grid.triangles[t]);
  }
  std::vector<Vec2> vertices;
  for (auto& tri : triangles) {
    for (int& v : tri) {
      if (keep_vertex[v] < 0) {
        keep_vertex[v] = static_cast<int>(vertices.size());
        vertices.push_back(grid.vertices[v]);
      }
      v = keep_vertex[v];
    }
  }
  const Mesh coarse = build_mesh(std::move(vertices), std::move(triangles), spec.classifier);
  problem.meshes = build_hierarchy_meshes(coarse, refinements);
  return problem;
}

SpMat DualPoissonSystem::robin_block() const {
  SpMat K = S + alpha * M;
  K.makeCompressed();
  return K;
}

SpMat DualPoissonSystem::robin_saddle() const { return poisson_saddle(robin_block(), T); }

SpMat DualPoissonSystem::dirichlet_saddle() const { return poisson_saddle(S, T); }

VectorXd DualPoissonSystem::lumped_diagonal() const {
  // Row i of [S_ee, S_ie^T, T_ie^T] is row i of S together with column i of T.
  const SpMat St = S.transpose();
  VectorXd g(ext.size());
  for (std::size_t k = 0; k < ext.size(); ++k) {
    const Index i = ext[k];
    double big = 0;
    for (SpMat::InnerIterator it(St, i); it; ++it) big = std::max(big, std::abs(it.value()));
    for (SpMat::InnerIterator it(T, i); it; ++it) big = std::max(big, std::abs(it.value()));
    g(k) = alpha * big;
  }
  return g;
}

SpMat DualPoissonSystem::averaged_saddle() const {
  const VectorXd g = lumped_diagonal();
  std::vector<Triplet> trip;
  for (std::size_t k = 0; k < ext.size(); ++k) trip.emplace_back(ext[k], ext[k], g(k));
  SpMat K = S + sparse_from(n(), n(), trip);
  return poisson_saddle(K, T);
}

VectorXd DualPoissonSystem::lumping_coefficients() const {
  const VectorXd g = lumped_diagonal();
  const VectorXd sums = M * VectorXd::Ones(n());
  VectorXd beta(ext.size());
  for (std::size_t k = 0; k < ext.size(); ++k) beta(k) = g(k) / sums(ext[k]);
  return beta;
}

VectorXd DualPoissonSystem::rhs() const {
  VectorXd b = VectorXd::Zero(n() + m());
  b.tail(m()) = -f;
  return b;
}

DualPoissonSystem dual_poisson_robin(const Mesh& mesh, double alpha,
                                     const std::function<double(const Vec2&)>& source) {
  if (!(alpha >= 0) || !std::isfinite(alpha)) throw Error("dual_poisson_robin: alpha must be finite and >= 0");
  const DofLayout layout = build_layout(mesh);
  const Index n = layout.stress_per_row();
  const Index m = 3 * Index(mesh.num_triangles());
  const auto rule = reference_triangle_rule(4);

  std::vector<Triplet> s_trip, t_trip, m_trip;
  DualPoissonSystem sys;
  sys.alpha = alpha;
  sys.f = VectorXd::Zero(m);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Rt1Element element(mesh, t);
    const auto& tri = mesh.triangles[t];
    const auto q = quadrature(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], 4);
    Eigen::Matrix<double, 8, 8> s_loc = Eigen::Matrix<double, 8, 8>::Zero();
    Eigen::Matrix<double, 3, 8> t_loc = Eigen::Matrix<double, 3, 8>::Zero();
    Eigen::Vector3d f_loc = Eigen::Vector3d::Zero();
    for (std::size_t p = 0; p < q.size(); ++p) {
      const auto phi = element.values(q.points[p]);
      const auto div = element.divergences(q.points[p]);
      const Eigen::Vector3d lam = barycentric(mesh, t, q.points[p]);
      s_loc += q.weights[p] * phi.transpose() * phi;
      t_loc += q.weights[p] * lam * div;
      f_loc += q.weights[p] * source(q.points[p]) * lam;
    }
    std::array<Index, 8> dofs{};
    for (int i = 0; i < 8; ++i) dofs[i] = local_stress_dof(mesh, layout, 0, t, i);
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) s_trip.emplace_back(dofs[i], dofs[j], s_loc(i, j));
      for (int k = 0; k < 3; ++k) t_trip.emplace_back(3 * Index(t) + k, dofs[i], t_loc(k, i));
    }
    for (int k = 0; k < 3; ++k) sys.f(3 * Index(t) + k) = f_loc(k);
  }

  const auto line = gauss_legendre_unit(4);
  std::vector<char> is_ext(n, 0);
  for (const int e : mesh.boundary_edges) {
    const Edge& edge = mesh.edges[e];
    const int t = edge.triangles[0];
    const Rt1Element element(mesh, t);
    int l = 0;
    while (mesh.triangle_edges[t][l] != e) ++l;
    const Vec2& a = mesh.vertices[edge.vertices[0]];
    const Vec2& b = mesh.vertices[edge.vertices[1]];
    Eigen::Matrix2d m_loc = Eigen::Matrix2d::Zero();
    for (std::size_t p = 0; p < line.size(); ++p) {
      const Vec2 x = a + line.points[p](0) * (b - a);
      const auto phi = element.values(x);
      const Eigen::Vector2d tn(phi.col(2 * l).dot(edge.normal), phi.col(2 * l + 1).dot(edge.normal));
      m_loc += line.weights[p] * edge.length * tn * tn.transpose();
    }
    for (int i = 0; i < 2; ++i) {
      is_ext[layout.stress_edge_dof(0, e, i)] = 1;
      for (int j = 0; j < 2; ++j)
        m_trip.emplace_back(layout.stress_edge_dof(0, e, i), layout.stress_edge_dof(0, e, j), m_loc(i, j));
    }
  }

  sys.S = sparse_from(n, n, s_trip);
  sys.M = sparse_from(n, n, m_trip);
  sys.T = sparse_from(m, n, t_trip);
  for (Index i = 0; i < n; ++i) (is_ext[i] ? sys.ext : sys.intr).push_back(i);
  return sys;
}

ManufacturedSolution manufactured_solution(const MaterialParams& material, ManufacturedKind kind) {
  material.validate();
  if (material.incompressible()) throw Error("manufactured_solution: lambda = inf is not supported");
  ManufacturedSolution sol;
  sol.kind = kind;
  sol.material = material;
  const double mu = material.mu;
  const double lambda = material.lambda;
  auto from_strain = [mu, lambda](const Mat2& eps) -> Mat2 {
    return 2 * mu * eps + lambda * eps.trace() * Mat2::Identity();
  };

  if (kind == ManufacturedKind::Linear) {
    Mat2 grad;
    grad << 0.3, 0.2, -0.4, 0.5;
    const Mat2 sigma = from_strain(0.5 * (grad + grad.transpose()));
    sol.displacement = [grad](const Vec2& x) -> Vec2 { return grad * x + Vec2(0.1, -0.2); };
    sol.stress = [sigma](const Vec2&) { return sigma; };
    sol.rotation = [grad](const Vec2&) { return 0.5 * (grad(1, 0) - grad(0, 1)); };
    sol.body_force = [](const Vec2&) { return Vec2::Zero(); };
    return sol;
  }

  // u = (x^3 - 2 x y^2 + y^2, x^2 y + y^3 / 3 - x)
  sol.displacement = [](const Vec2& p) -> Vec2 {
    const double x = p(0), y = p(1);
    return {x * x * x - 2 * x * y * y + y * y, x * x * y + y * y * y / 3 - x};
  };
  sol.stress = [from_strain](const Vec2& p) {
    const double x = p(0), y = p(1);
    Mat2 eps;
    eps(0, 0) = 3 * x * x - 2 * y * y;
    eps(1, 1) = x * x + y * y;
    eps(0, 1) = eps(1, 0) = 0.5 * (-2 * x * y + 2 * y - 1);
    return from_strain(eps);
  };
  sol.rotation = [](const Vec2& p) { return 0.5 * (6 * p(0) * p(1) - 2 * p(1) - 1); };
  sol.body_force = [mu, lambda](const Vec2& p) -> Vec2 {
    const double x = p(0), y = p(1);
    return {-(10 * mu * x + 8 * lambda * x + 2 * mu), -(2 * mu * y - 2 * lambda * y)};
  };
  return sol;
}

Problem manufactured_elasticity(int refinements, const MaterialParams& material, int cells,
                                ManufacturedKind kind) {
  if (refinements < 0) throw Error("manufactured_elasticity: refinements must be non-negative");
  const ManufacturedSolution sol = manufactured_solution(material, kind);
  Problem problem;
  ProblemSpec& spec = problem.spec;
  spec.name = "manufactured";
  spec.material = material;
  spec.classifier = [](const Vec2& x) {
    return (std::abs(x(0)) < kGeomTol || std::abs(x(1)) < kGeomTol) ? BoundaryLabel::Dirichlet
                                                                     : BoundaryLabel::Neumann;
  };
  spec.loads.body_force = sol.body_force;
  spec.loads.dirichlet = sol.displacement;
  const auto stress = sol.stress;
  spec.loads.neumann = [stress](const Vec2& x) -> Vec2 {
    // Only the right (x = 1) and top (y = 1) edges are Neumann.
    const Vec2 n = std::abs(x(0) - 1) < 1e-8 ? Vec2(1, 0) : Vec2(0, 1);
    return stress(x) * n;
  };
  const Mesh coarse = unit_square_mesh(cells, spec.classifier);
  problem.meshes = build_hierarchy_meshes(coarse, refinements);
  return problem;
}

double stress_l2_error(const Mesh& mesh, const DofLayout& layout, const VectorXd& stress,
                       const std::function<Mat2(const Vec2&)>& exact) {
  if (stress.size() != layout.n_stress()) throw Error("stress_l2_error: expected a full stress vector");
  const auto elements = build_rt1_elements(mesh);
  double sum = 0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto q = quadrature(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], 6);
    for (std::size_t p = 0; p < q.size(); ++p) {
      const Mat2 s = exact(q.points[p]);
      for (int r = 0; r < 2; ++r) {
        const Vec2 d = evaluate_stress_row(mesh, layout, elements, stress, r, t, q.points[p]) - s.row(r).transpose();
        sum += q.weights[p] * d.squaredNorm();
      }
    }
  }
  return std::sqrt(sum);
}

}  // namespace dualmg
