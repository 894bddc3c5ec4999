// SPDX-FileCopyrightText: Copyright (c) 2026 The dualmg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "dualmg/types.hpp"

namespace dualmg {

enum class BoundaryLabel : std::uint8_t { Neumann, Dirichlet };

/// Maps the midpoint of a boundary edge to its label.
using BoundaryClassifier = std::function<BoundaryLabel(const Vec2&)>;

struct Edge {
  /// Endpoints, lower global vertex index first.
  std::array<int, 2> vertices{};
  /// Adjacent triangles, lower index first; triangles[1] == -1 on the boundary.
  std::array<int, 2> triangles{-1, -1};
  /// Unit normal pointing out of triangles[0] (outward on the boundary).
  Vec2 normal = Vec2::Zero();
  double length = 0;

  [[nodiscard]] bool on_boundary() const { return triangles[1] < 0; }
};

/// Conforming triangulation with globally oriented edges. Local edge k of a
/// triangle is opposite its local vertex k.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Edge> edges;
  /// Global edge index of each local edge.
  std::vector<std::array<int, 3>> triangle_edges;
  /// +1 if the triangle is edges[e].triangles[0], else -1.
  std::vector<std::array<int, 3>> edge_signs;
  std::vector<int> boundary_edges;
  /// Indexed by edge; only meaningful for boundary edges.
  std::vector<BoundaryLabel> edge_labels;
  /// Triangles incident to each vertex, ascending.
  std::vector<std::vector<int>> vertex_triangles;
  int level = 0;

  [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices.size()); }
  [[nodiscard]] int num_triangles() const { return static_cast<int>(triangles.size()); }
  [[nodiscard]] int num_edges() const { return static_cast<int>(edges.size()); }

  [[nodiscard]] double area(int t) const;
  [[nodiscard]] Vec2 edge_midpoint(int e) const;
  [[nodiscard]] Vec2 centroid(int t) const;
  [[nodiscard]] BoundaryLabel label(int e) const { return edge_labels[e]; }
};

/// Extracts edges with the global orientation convention. Inverted or
/// degenerate triangles and edges shared by more than 2 triangles raise Error.
Mesh build_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                const BoundaryClassifier& classifier, int level = 0);

/// Same as build_mesh, but labels are supplied per boundary edge (by its vertex pair).
Mesh build_mesh_with_labels(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                            const std::vector<std::pair<std::array<int, 2>, BoundaryLabel>>& labels, int level = 0);

struct Refinement {
  Mesh fine;
  /// child_map[t] holds the 4 fine triangles of coarse triangle t; the last one is the middle child.
  std::vector<std::array<int, 4>> child_map;
  /// Coarse parent triangle of every fine triangle.
  std::vector<int> parent;
  /// Fine vertex index of the midpoint of every coarse edge.
  std::vector<int> edge_midpoint_vertex;
  /// Coarse edge containing each fine edge, or -1 for edges interior to a coarse triangle.
  std::vector<int> edge_parent;
};

/// Red refinement: every triangle is split into 4 congruent children through
/// its edge midpoints. Coarse vertices keep their indices.
Refinement refine_uniform(const Mesh& mesh);

struct MeshHierarchy {
  std::vector<Mesh> meshes;  // coarse -> fine
  /// refinements[j] maps meshes[j] to meshes[j + 1].
  std::vector<Refinement> refinements;

  [[nodiscard]] int finest() const { return static_cast<int>(meshes.size()) - 1; }
};

MeshHierarchy build_hierarchy_meshes(const Mesh& coarse, int refinements);

struct Patch {
  int anchor_node = -1;
  std::vector<int> elements;          // ascending
  std::vector<int> generation_trace;  // nodes whose patches were merged in
};

Patch node_patch(const Mesh& mesh, int node);

/// Grows boundary patches with fewer than 3 elements by merging in the patch
/// of the lowest-index node not yet used, until at least 3 elements are covered.
Patch enlarge_patch(const Mesh& mesh, Patch patch);

/// One enlarged patch per vertex, ordered by anchor node.
std::vector<Patch> build_patches(const Mesh& mesh);

/// Plain-text format: "V T B" header, V coordinate lines, T triangle lines,
/// B boundary lines "v0 v1 N|D".
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

}  // namespace dualmg
