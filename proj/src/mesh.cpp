// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dualmg/mesh.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace dualmg {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b - a)(0) * (c - a)(1) - (b - a)(1) * (c - a)(0));
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// Shared by both build_mesh flavours; labels are filled in by the caller.
Mesh build_topology(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles, int level) {
  Mesh mesh;
  mesh.level = level;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  const int nv = mesh.num_vertices();
  const int nt = mesh.num_triangles();

  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) throw Error("build_mesh: triangle " + std::to_string(t) + " references invalid vertex");
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw Error("build_mesh: triangle " + std::to_string(t) + " repeats a vertex");
    }
    const double area = signed_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    if (!(area > 0)) throw Error("build_mesh: triangle " + std::to_string(t) + " is inverted or degenerate");
  }

  std::map<std::uint64_t, int> edge_index;
  mesh.triangle_edges.resize(nt);
  mesh.edge_signs.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[(k + 1) % 3];
      const int b = tri[(k + 2) % 3];
      const auto key = edge_key(a, b);
      auto it = edge_index.find(key);
      int e;
      if (it == edge_index.end()) {
        e = mesh.num_edges();
        edge_index.emplace(key, e);
        Edge edge;
        edge.vertices = {std::min(a, b), std::max(a, b)};
        edge.triangles = {t, -1};
        mesh.edges.push_back(edge);
      } else {
        e = it->second;
        auto& edge = mesh.edges[e];
        if (edge.triangles[1] >= 0) {
          throw Error("build_mesh: non-manifold edge (" + std::to_string(a) + ", " + std::to_string(b) + ")");
        }
        edge.triangles[1] = t;  // t is visited in ascending order, so triangles[0] < t
      }
      mesh.triangle_edges[t][k] = e;
    }
  }

  // Normal of an edge points out of its lower-index triangle. Local edge k of a
  // CCW triangle runs from vertex k+1 to k+2; its outward normal is the
  // clockwise rotation of that direction.
  for (int e = 0; e < mesh.num_edges(); ++e) {
    auto& edge = mesh.edges[e];
    const int t = edge.triangles[0];
    const auto& tri = mesh.triangles[t];
    int k = 0;
    while (mesh.triangle_edges[t][k] != e) ++k;
    const Vec2 d = mesh.vertices[tri[(k + 2) % 3]] - mesh.vertices[tri[(k + 1) % 3]];
    edge.length = d.norm();
    edge.normal = Vec2(d(1), -d(0)) / edge.length;
  }
  for (int t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      mesh.edge_signs[t][k] = mesh.edges[mesh.triangle_edges[t][k]].triangles[0] == t ? 1 : -1;
    }
  }

  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edges[e].on_boundary()) mesh.boundary_edges.push_back(e);
  }
  mesh.edge_labels.assign(mesh.num_edges(), BoundaryLabel::Neumann);

  mesh.vertex_triangles.assign(nv, {});
  for (int t = 0; t < nt; ++t) {
    for (int v : mesh.triangles[t]) mesh.vertex_triangles[v].push_back(t);
  }
  return mesh;
}

}  // namespace

double Mesh::area(int t) const {
  const auto& tri = triangles[t];
  return signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

Vec2 Mesh::edge_midpoint(int e) const {
  return 0.5 * (vertices[edges[e].vertices[0]] + vertices[edges[e].vertices[1]]);
}

Vec2 Mesh::centroid(int t) const {
  const auto& tri = triangles[t];
  return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

Mesh build_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                const BoundaryClassifier& classifier, int level) {
  Mesh mesh = build_topology(std::move(vertices), std::move(triangles), level);
  for (int e : mesh.boundary_edges) mesh.edge_labels[e] = classifier(mesh.edge_midpoint(e));
  return mesh;
}

Mesh build_mesh_with_labels(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                            const std::vector<std::pair<std::array<int, 2>, BoundaryLabel>>& labels, int level) {
  Mesh mesh = build_topology(std::move(vertices), std::move(triangles), level);
  std::map<std::uint64_t, BoundaryLabel> lookup;
  for (const auto& [pair, label] : labels) lookup[edge_key(pair[0], pair[1])] = label;
  for (int e : mesh.boundary_edges) {
    const auto& v = mesh.edges[e].vertices;
    auto it = lookup.find(edge_key(v[0], v[1]));
    if (it == lookup.end()) {
      throw Error("build_mesh: missing label for boundary edge (" + std::to_string(v[0]) + ", " +
                  std::to_string(v[1]) + ")");
    }
    mesh.edge_labels[e] = it->second;
  }
  return mesh;
}

Refinement refine_uniform(const Mesh& mesh) {
  Refinement ref;
  const int nv = mesh.num_vertices();
  std::vector<Vec2> vertices = mesh.vertices;
  ref.edge_midpoint_vertex.resize(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    ref.edge_midpoint_vertex[e] = nv + e;
    vertices.push_back(mesh.edge_midpoint(e));
  }

  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(4 * mesh.num_triangles());
  ref.child_map.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& v = mesh.triangles[t];
    const auto& te = mesh.triangle_edges[t];
    const int m0 = ref.edge_midpoint_vertex[te[0]];
    const int m1 = ref.edge_midpoint_vertex[te[1]];
    const int m2 = ref.edge_midpoint_vertex[te[2]];
    const int base = static_cast<int>(triangles.size());
    triangles.push_back({v[0], m2, m1});
    triangles.push_back({m2, v[1], m0});
    triangles.push_back({m1, m0, v[2]});
    triangles.push_back({m0, m1, m2});
    ref.child_map[t] = {base, base + 1, base + 2, base + 3};
    for (int c = 0; c < 4; ++c) ref.parent.push_back(t);
  }

  std::vector<std::pair<std::array<int, 2>, BoundaryLabel>> labels;
  for (int e : mesh.boundary_edges) {
    const int mid = ref.edge_midpoint_vertex[e];
    labels.push_back({{mesh.edges[e].vertices[0], mid}, mesh.edge_labels[e]});
    labels.push_back({{mid, mesh.edges[e].vertices[1]}, mesh.edge_labels[e]});
  }
  ref.fine = build_mesh_with_labels(std::move(vertices), std::move(triangles), labels, mesh.level + 1);

  // A fine edge lies on a coarse edge iff one endpoint is that edge's midpoint
  // and the other is one of its endpoints.
  ref.edge_parent.assign(ref.fine.num_edges(), -1);
  for (int fe = 0; fe < ref.fine.num_edges(); ++fe) {
    const auto& fv = ref.fine.edges[fe].vertices;  // fv[0] < fv[1]
    if (fv[1] >= nv && fv[0] < nv) {
      const int ce = fv[1] - nv;
      const auto& cv = mesh.edges[ce].vertices;
      if (cv[0] == fv[0] || cv[1] == fv[0]) ref.edge_parent[fe] = ce;
    }
  }
  return ref;
}

MeshHierarchy build_hierarchy_meshes(const Mesh& coarse, int refinements) {
  if (refinements < 0) throw Error("build_hierarchy_meshes: negative refinement count");
  MeshHierarchy h;
  h.meshes.push_back(coarse);
  for (int j = 0; j < refinements; ++j) {
    auto ref = refine_uniform(h.meshes.back());
    h.meshes.push_back(ref.fine);
    h.refinements.push_back(std::move(ref));
  }
  return h;
}

Patch node_patch(const Mesh& mesh, int node) {
  if (node < 0 || node >= mesh.num_vertices()) throw Error("node_patch: invalid node " + std::to_string(node));
  if (mesh.vertex_triangles[node].empty()) throw Error("node_patch: isolated vertex " + std::to_string(node));
  Patch p;
  p.anchor_node = node;
  p.elements = mesh.vertex_triangles[node];
  p.generation_trace = {node};
  return p;
}

Patch enlarge_patch(const Mesh& mesh, Patch patch) {
  if (patch.elements.size() >= 3) return patch;
  if (mesh.num_triangles() < 3) throw Error("enlarge_patch: mesh has fewer than 3 triangles");
  std::set<int> elements(patch.elements.begin(), patch.elements.end());
  while (elements.size() < 3) {
    int next = -1;
    for (int t : elements) {
      for (int v : mesh.triangles[t]) {
        const bool used =
            std::find(patch.generation_trace.begin(), patch.generation_trace.end(), v) != patch.generation_trace.end();
        if (!used && (next < 0 || v < next)) next = v;
      }
    }
    if (next < 0) throw Error("enlarge_patch: no node left to enlarge patch " + std::to_string(patch.anchor_node));
    patch.generation_trace.push_back(next);
    elements.insert(mesh.vertex_triangles[next].begin(), mesh.vertex_triangles[next].end());
  }
  patch.elements.assign(elements.begin(), elements.end());
  return patch;
}

std::vector<Patch> build_patches(const Mesh& mesh) {
  std::vector<Patch> patches;
  patches.reserve(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) patches.push_back(enlarge_patch(mesh, node_patch(mesh, v)));
  return patches;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.boundary_edges.size() << '\n';
  out.precision(17);
  for (const auto& v : mesh.vertices) out << v(0) << ' ' << v(1) << '\n';
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (int e : mesh.boundary_edges) {
    out << mesh.edges[e].vertices[0] << ' ' << mesh.edges[e].vertices[1] << ' '
        << (mesh.edge_labels[e] == BoundaryLabel::Dirichlet ? 'D' : 'N') << '\n';
  }
}

Mesh read_mesh(std::istream& in) {
  std::size_t nv = 0, nt = 0, nb = 0;
  if (!(in >> nv >> nt >> nb)) throw Error("read_mesh: bad header");
  std::vector<Vec2> vertices(nv);
  for (auto& v : vertices) {
    if (!(in >> v(0) >> v(1))) throw Error("read_mesh: truncated vertex list");
  }
  std::vector<std::array<int, 3>> triangles(nt);
  for (auto& t : triangles) {
    if (!(in >> t[0] >> t[1] >> t[2])) throw Error("read_mesh: truncated triangle list");
  }
  std::vector<std::pair<std::array<int, 2>, BoundaryLabel>> labels;
  for (std::size_t i = 0; i < nb; ++i) {
    int a = 0, b = 0;
    std::string label;
    if (!(in >> a >> b >> label)) throw Error("read_mesh: truncated boundary list");
    if (label != "N" && label != "D") throw Error("read_mesh: unknown boundary label '" + label + "'");
    labels.push_back({{a, b}, label == "D" ? BoundaryLabel::Dirichlet : BoundaryLabel::Neumann});
  }
  Mesh mesh = build_mesh_with_labels(std::move(vertices), std::move(triangles), labels);
  if (mesh.boundary_edges.size() != nb) throw Error("read_mesh: boundary edge count does not match header");
  return mesh;
}

}  // namespace dualmg
