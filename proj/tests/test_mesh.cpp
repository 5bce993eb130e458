#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "prismdg/errors.hpp"
#include "prismdg/mesh.hpp"
#include "support.hpp"

using namespace prismdg;

namespace {

double flat(double, double) { return -10.0; }

// Share of interior edges whose two triangles are stored at most `window` apart.
double close_pair_share(const Mesh2D& m, int window) {
  int close = 0, total = 0;
  for (const Edge& e : m.edges()) {
    if (e.right < 0) continue;
    close += std::abs(e.left - e.right) <= window;
    ++total;
  }
  return static_cast<double>(close) / total;
}

int interior_edges(const Mesh2D& m) {
  int n = 0;
  for (const Edge& e : m.edges()) n += e.right >= 0;
  return n;
}

}  // namespace

TEST_CASE("smallest split square") {
  const Mesh2D m = generate_basin_mesh(1, 1, 1.0, 1.0, flat);
  CHECK(m.num_triangles() == 2);
  CHECK(m.num_vertices() == 4);
  CHECK(m.num_edges() == 5);
  CHECK(interior_edges(m) == 1);
}

TEST_CASE("2x2 basin connectivity is symmetric") {
  const Mesh2D m = generate_basin_mesh(2, 2, 2.0, 2.0, flat);
  REQUIRE(m.num_triangles() == 8);
  for (int t = 0; t < m.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int nb = m.neighbor(t, k);
      if (nb < 0) {
        CHECK(m.boundary_tag(t, k) == BoundaryTag::Wall);
        continue;
      }
      const int nk = m.neighbor_local_edge(t, k);
      CHECK(m.neighbor(nb, nk) == t);
      CHECK(m.edge_id(nb, nk) == m.edge_id(t, k));
      // The neighbor walks the shared edge in the opposite direction.
      CHECK(m.triangles()[nb][nk] == m.triangles()[t][(k + 1) % 3]);
      CHECK(m.triangles()[nb][(nk + 1) % 3] == m.triangles()[t][k]);
    }
  }
}

TEST_CASE("summed jacobians give the basin area") {
  const double lx = 3.0e4, ly = 1.7e4;
  const Mesh2D m = generate_basin_mesh(32, 32, lx, ly, flat);
  double area = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) area += 0.5 * m.jacobian(t);
  CHECK(std::abs(area - lx * ly) / (lx * ly) < 1e-12);
}

TEST_CASE("edge normals point away from the centroid and have unit length") {
  const Mesh2D m = generate_basin_mesh(3, 2, 5.0, 3.0, flat);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const Vec2 c = m.centroid(t);
    for (int k = 0; k < 3; ++k) {
      const Vec2 mid = 0.5 * (m.vertex(t, k) + m.vertex(t, (k + 1) % 3));
      const Vec2 n = m.edge_normal(t, k);
      CHECK(dot(n, mid - c) > 0.0);
      CHECK(norm(n) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("basis gradients sum to zero and reproduce linear functions") {
  const Mesh2D m = generate_basin_mesh(2, 2, 4.0, 3.0, flat);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto g = m.basis_gradients(t);
    const Vec2 sum = g[0] + g[1] + g[2];
    CHECK(std::abs(sum.x) < 1e-14);
    CHECK(std::abs(sum.y) < 1e-14);
    // f(x, y) = x interpolated at the vertices has gradient (1, 0).
    Vec2 gx{};
    for (int k = 0; k < 3; ++k) gx = gx + m.vertex(t, k).x * g[k];
    CHECK(gx.x == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(gx.y) < 1e-13);
  }
}

TEST_CASE("clockwise triangle is rejected") {
  std::vector<Vec2> v = {{0, 0}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS(Mesh2D::from_triangles(v, {-1, -1, -1}, {{0, 2, 1}}), NonPositiveArea);
  CHECK_NOTHROW(Mesh2D::from_triangles(v, {-1, -1, -1}, {{0, 1, 2}}));
}

TEST_CASE("hilbert index visits every cell once along grid neighbors") {
  const int order = 4;
  const std::uint32_t side = 1u << order;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> at(side * side, {~0u, ~0u});
  for (std::uint32_t x = 0; x < side; ++x) {
    for (std::uint32_t y = 0; y < side; ++y) {
      const std::uint64_t d = hilbert_index(x, y, order);
      REQUIRE(d < at.size());
      CHECK(at[d].first == ~0u);
      at[d] = {x, y};
    }
  }
  for (std::size_t d = 1; d < at.size(); ++d) {
    const long dx = static_cast<long>(at[d].first) - static_cast<long>(at[d - 1].first);
    const long dy = static_cast<long>(at[d].second) - static_cast<long>(at[d - 1].second);
    CHECK(std::abs(dx) + std::abs(dy) == 1);
  }
}

TEST_CASE("hilbert reordering") {
  SUBCASE("two triangles give a permutation") {
    const Mesh2D m = hilbert_reorder(generate_basin_mesh(1, 1, 1.0, 1.0, flat));
    std::vector<int> p = m.hilbert_perm();
    std::sort(p.begin(), p.end());
    CHECK(p == std::vector<int>{0, 1});
  }
  SUBCASE("improves neighbor locality and is idempotent") {
    const Mesh2D rows = generate_basin_mesh(32, 32, 1.0, 1.0, flat);
    const Mesh2D once = hilbert_reorder(rows);
    const Mesh2D twice = hilbert_reorder(once);
    // The mean distance favors row-major order: a Hilbert curve has a few
    // pairs straddling its quadrant seams whose index gap dominates the mean.
    // Locality shows in how many neighbors sit close in storage.
    CHECK(neighbor_index_distance(once) > neighbor_index_distance(rows));
    CHECK(close_pair_share(once, 8) > close_pair_share(rows, 8));
    CHECK(once.triangles() == twice.triangles());
    std::vector<int> p = once.hilbert_perm();
    std::sort(p.begin(), p.end());
    std::vector<int> id(p.size());
    std::iota(id.begin(), id.end(), 0);
    CHECK(p == id);
    // Same triangles, same orientation, new positions.
    for (int i = 0; i < once.num_triangles(); ++i) {
      CHECK(once.triangles()[i] == rows.triangles()[once.hilbert_perm()[i]]);
    }
  }
}

TEST_CASE("mesh file round trip") {
  const Mesh2D m = generate_basin_mesh(3, 2, 7.5, 3.25, [](double x, double y) { return -5.0 - 0.1 * x - 0.01 * y; });
  std::stringstream s;
  write_mesh(s, m);
  const Mesh2D back = read_mesh(s);
  CHECK(back.triangles() == m.triangles());
  CHECK(back.vertices() == m.vertices());
  CHECK(back.bed() == m.bed());

  std::istringstream bad("NOT-A-MESH 1\n");
  CHECK_THROWS_AS(read_mesh(bad), IoError);
}
