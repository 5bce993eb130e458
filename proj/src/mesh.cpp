#include "prismdg/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "prismdg/errors.hpp"

namespace prismdg {

Mesh2D Mesh2D::from_triangles(std::vector<Vec2> vertices, std::vector<double> bed,
                              std::vector<std::array<int, 3>> triangles) {
  if (bed.size() != vertices.size()) {
    throw ShapeMismatch("bed has " + std::to_string(bed.size()) + " values for " +
                        std::to_string(vertices.size()) + " vertices");
  }
  Mesh2D mesh;
  mesh.vertices_ = std::move(vertices);
  mesh.bed_ = std::move(bed);
  mesh.triangles_ = std::move(triangles);
  const int nv = mesh.num_vertices();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int v : mesh.triangles_[t]) {
      if (v < 0 || v >= nv) {
        throw Error("triangle " + std::to_string(t) + " references vertex " + std::to_string(v));
      }
    }
    if (!(mesh.jacobian(t) > 0.0)) {
      throw NonPositiveArea("triangle " + std::to_string(t) +
                            " has non-positive signed area (not counterclockwise or degenerate)");
    }
  }
  mesh.perm_.resize(mesh.triangles_.size());
  std::iota(mesh.perm_.begin(), mesh.perm_.end(), 0);
  mesh.build_connectivity();
  return mesh;
}

void Mesh2D::build_connectivity() {
  const int nt = num_triangles();
  edges_.clear();
  neighbor_.assign(nt, {-1, -1, -1});
  neighbor_edge_.assign(nt, {-1, -1, -1});
  edge_of_.assign(nt, {-1, -1, -1});

  std::map<std::pair<int, int>, int> lookup;
  for (int t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = triangles_[t][k];
      const int b = triangles_[t][(k + 1) % 3];
      const auto key = std::minmax(a, b);
      auto it = lookup.find(key);
      if (it == lookup.end()) {
        Edge e;
        e.v0 = a;
        e.v1 = b;
        e.left = t;
        e.left_local = k;
        e.tag = BoundaryTag::Wall;
        lookup.emplace(key, static_cast<int>(edges_.size()));
        edge_of_[t][k] = static_cast<int>(edges_.size());
        edges_.push_back(e);
        continue;
      }
      Edge& e = edges_[it->second];
      if (e.right >= 0 || e.v0 != b) {
        throw Error("edge (" + std::to_string(a) + "," + std::to_string(b) +
                    ") is shared inconsistently (non-manifold or mixed orientation)");
      }
      e.right = t;
      e.right_local = k;
      e.tag = BoundaryTag::Interior;
      edge_of_[t][k] = it->second;
      neighbor_[t][k] = e.left;
      neighbor_edge_[t][k] = e.left_local;
      neighbor_[e.left][e.left_local] = t;
      neighbor_edge_[e.left][e.left_local] = k;
    }
  }
}

void Mesh2D::set_boundary_tag(int edge, BoundaryTag tag) {
  Edge& e = edges_.at(edge);
  if (e.right >= 0) {
    throw Error("edge " + std::to_string(edge) + " is interior and cannot carry a boundary tag");
  }
  if (tag == BoundaryTag::Interior) {
    throw Error("boundary edges must be tagged Wall or Open");
  }
  e.tag = tag;
}

double Mesh2D::jacobian(int tri) const {
  const Vec2 a = vertex(tri, 0);
  return cross(vertex(tri, 1) - a, vertex(tri, 2) - a);
}

double Mesh2D::edge_length(int tri, int k) const {
  return norm(vertex(tri, (k + 1) % 3) - vertex(tri, k));
}

Vec2 Mesh2D::edge_normal(int tri, int k) const {
  const Vec2 d = vertex(tri, (k + 1) % 3) - vertex(tri, k);
  const double len = norm(d);
  return {d.y / len, -d.x / len};
}

Vec2 Mesh2D::centroid(int tri) const {
  const Vec2 s = vertex(tri, 0) + vertex(tri, 1) + vertex(tri, 2);
  return (1.0 / 3.0) * s;
}

std::array<Vec2, 3> Mesh2D::basis_gradients(int tri) const {
  const Vec2 p0 = vertex(tri, 0);
  const Vec2 e1 = vertex(tri, 1) - p0;
  const Vec2 e2 = vertex(tri, 2) - p0;
  const double det = cross(e1, e2);
  // Rows of the inverse Jacobian: grad(xi) and grad(eta).
  const Vec2 gxi{e2.y / det, -e2.x / det};
  const Vec2 geta{-e1.y / det, e1.x / det};
  return {Vec2{-gxi.x - geta.x, -gxi.y - geta.y}, gxi, geta};
}

Mesh2D generate_basin_mesh(int nx, int ny, double lx, double ly, const BedFunction& bed) {
  if (nx < 1 || ny < 1) {
    throw Error("basin mesh needs nx, ny >= 1 (got " + std::to_string(nx) + ", " +
                std::to_string(ny) + ")");
  }
  if (!(lx > 0.0) || !(ly > 0.0)) {
    throw NonPositiveArea("basin extents must be positive");
  }
  std::vector<Vec2> xy;
  std::vector<double> b;
  xy.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const double x = lx * i / nx;
      const double y = ly * j / ny;
      xy.push_back({x, y});
      b.push_back(bed(x, y));
    }
  }
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> tris;
  tris.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return Mesh2D::from_triangles(std::move(xy), std::move(b), std::move(tris));
}

std::uint64_t hilbert_index(std::uint32_t x, std::uint32_t y, int order) {
  std::uint64_t d = 0;
  const std::uint32_t n = 1u << order;
  for (std::uint32_t s = n / 2; s > 0; s /= 2) {
    const std::uint32_t rx = (x & s) > 0 ? 1u : 0u;
    const std::uint32_t ry = (y & s) > 0 ? 1u : 0u;
    d += static_cast<std::uint64_t>(s) * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = n - 1 - x;
        y = n - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

Mesh2D hilbert_reorder(const Mesh2D& mesh) {
  constexpr int kOrder = 16;
  const double cells = static_cast<double>((1u << kOrder) - 1);
  Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const Vec2& p : mesh.vertices()) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double sx = hi.x > lo.x ? cells / (hi.x - lo.x) : 0.0;
  const double sy = hi.y > lo.y ? cells / (hi.y - lo.y) : 0.0;

  const int nt = mesh.num_triangles();
  std::vector<std::uint64_t> key(nt);
  for (int t = 0; t < nt; ++t) {
    const Vec2 c = mesh.centroid(t);
    const auto ix = static_cast<std::uint32_t>(std::clamp((c.x - lo.x) * sx, 0.0, cells));
    const auto iy = static_cast<std::uint32_t>(std::clamp((c.y - lo.y) * sy, 0.0, cells));
    key[t] = hilbert_index(ix, iy, kOrder);
  }
  std::vector<int> order(nt);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });

  std::vector<std::array<int, 3>> tris(nt);
  std::vector<int> perm(nt);
  for (int i = 0; i < nt; ++i) {
    tris[i] = mesh.triangles()[order[i]];
    perm[i] = mesh.hilbert_perm()[order[i]];
  }
  Mesh2D out = Mesh2D::from_triangles(mesh.vertices(), mesh.bed(), std::move(tris));
  out.perm_ = std::move(perm);
  // Boundary tags follow the (vertex-pair identified) edges.
  std::map<std::pair<int, int>, BoundaryTag> tags;
  for (const Edge& e : mesh.edges()) {
    if (e.right < 0) tags[std::minmax(e.v0, e.v1)] = e.tag;
  }
  for (Edge& e : out.edges_) {
    if (e.right < 0) e.tag = tags.at(std::minmax(e.v0, e.v1));
  }
  return out;
}

double neighbor_index_distance(const Mesh2D& mesh) {
  double sum = 0.0;
  long count = 0;
  for (const Edge& e : mesh.edges()) {
    if (e.right < 0) continue;
    sum += std::abs(e.left - e.right);
    ++count;
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

Mesh2D read_mesh(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next = [&](const char* what) -> std::istringstream {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
    }
    throw IoError(std::string("mesh: unexpected end of file while reading ") + what);
  };
  auto fail = [&](const std::string& msg) {
    throw IoError("mesh line " + std::to_string(lineno) + ": " + msg);
  };

  {
    auto ss = next("header");
    std::string magic;
    int version = 0;
    if (!(ss >> magic >> version) || magic != "PRISMDG-MESH" || version != 1) {
      fail("expected 'PRISMDG-MESH 1'");
    }
  }
  int nv = 0;
  int nt = 0;
  {
    auto ss = next("counts");
    if (!(ss >> nv >> nt) || nv < 3 || nt < 1) fail("expected '<nv> <nt>'");
  }
  std::vector<Vec2> xy(nv);
  std::vector<double> b(nv);
  for (int i = 0; i < nv; ++i) {
    auto ss = next("vertex");
    if (!(ss >> xy[i].x >> xy[i].y >> b[i])) fail("expected 'x y b'");
  }
  std::vector<std::array<int, 3>> tris(nt);
  for (int i = 0; i < nt; ++i) {
    auto ss = next("triangle");
    if (!(ss >> tris[i][0] >> tris[i][1] >> tris[i][2])) fail("expected 'i0 i1 i2'");
  }
  return Mesh2D::from_triangles(std::move(xy), std::move(b), std::move(tris));
}

Mesh2D read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh2D& mesh) {
  out << "PRISMDG-MESH 1\n" << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
  out << std::setprecision(17);
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    out << mesh.vertices()[i].x << ' ' << mesh.vertices()[i].y << ' ' << mesh.bed()[i] << '\n';
  }
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace prismdg
