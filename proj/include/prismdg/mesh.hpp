#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "prismdg/vec.hpp"

namespace prismdg {

enum class BoundaryTag : std::uint8_t { Interior = 0, Wall = 1, Open = 2 };

// Mesh edge. `left` owns the edge as local edge `left_local` (running from
// v0 to v1 counterclockwise); `right` is -1 on the domain boundary.
struct Edge {
  int v0 = -1;
  int v1 = -1;
  int left = -1;
  int left_local = -1;
  int right = -1;
  int right_local = -1;
  BoundaryTag tag = BoundaryTag::Interior;
};

// Unstructured 2D triangular mesh with bathymetry at the vertices.
//
// Local edge k of a triangle runs from its vertex k to vertex (k+1)%3; a
// point on it is parametrized by s in [0,1]. The neighbor sees the same
// edge reversed, so s on one side is 1-s on the other.
class Mesh2D {
 public:
  Mesh2D() = default;

  // Validates orientation (positive signed area) and builds connectivity.
  // Boundary edges are tagged as walls.
  static Mesh2D from_triangles(std::vector<Vec2> vertices, std::vector<double> bed,
                               std::vector<std::array<int, 3>> triangles);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<double>& bed() const { return bed_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }

  Vec2 vertex(int tri, int k) const { return vertices_[triangles_[tri][k]]; }
  double bed_at(int tri, int k) const { return bed_[triangles_[tri][k]]; }

  // Neighbor across local edge k (-1 on the boundary) and the local index of
  // the shared edge inside that neighbor.
  int neighbor(int tri, int k) const { return neighbor_[tri][k]; }
  int neighbor_local_edge(int tri, int k) const { return neighbor_edge_[tri][k]; }
  int edge_id(int tri, int k) const { return edge_of_[tri][k]; }
  BoundaryTag boundary_tag(int tri, int k) const { return edges_[edge_of_[tri][k]].tag; }
  void set_boundary_tag(int edge, BoundaryTag tag);

  // Twice the signed area: the determinant of the parent-to-physical map.
  double jacobian(int tri) const;
  double area(int tri) const { return 0.5 * jacobian(tri); }
  double edge_length(int tri, int k) const;
  // Outward unit normal of local edge k.
  Vec2 edge_normal(int tri, int k) const;
  Vec2 centroid(int tri) const;

  // Physical gradients of the three P1 basis functions (constant per triangle).
  std::array<Vec2, 3> basis_gradients(int tri) const;

  // hilbert_perm()[i] is the original id of the triangle now stored at i.
  const std::vector<int>& hilbert_perm() const { return perm_; }

 private:
  friend Mesh2D hilbert_reorder(const Mesh2D& mesh);
  void build_connectivity();

  std::vector<Vec2> vertices_;
  std::vector<double> bed_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> neighbor_;
  std::vector<std::array<int, 3>> neighbor_edge_;
  std::vector<std::array<int, 3>> edge_of_;
  std::vector<int> perm_;
};

using BedFunction = std::function<double(double x, double y)>;

// Structured split-square triangulation of [0,Lx]x[0,Ly], row-major order.
Mesh2D generate_basin_mesh(int nx, int ny, double lx, double ly, const BedFunction& bed);

// Triangles sorted by the Hilbert index of their centroid over the vertex
// bounding box. Stable, so applying it twice yields the same order.
Mesh2D hilbert_reorder(const Mesh2D& mesh);

// Hilbert curve index of cell (x, y) on a 2^order x 2^order grid.
std::uint64_t hilbert_index(std::uint32_t x, std::uint32_t y, int order);

// Mean |i - j| over interior edges joining triangles i and j.
double neighbor_index_distance(const Mesh2D& mesh);

// Plain-text format: "PRISMDG-MESH 1", "<nv> <nt>", nv lines "x y b",
// nt lines "i0 i1 i2" (0-based, counterclockwise).
Mesh2D read_mesh(std::istream& in);
Mesh2D read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const Mesh2D& mesh);

}  // namespace prismdg
