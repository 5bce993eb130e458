#include <doctest.h>

#include <cmath>
#include <random>

#include "prismdg/column_grid.hpp"
#include "prismdg/errors.hpp"
#include "prismdg/reference.hpp"
#include "support.hpp"

using namespace prismdg;

namespace {

std::vector<double> uniform_eta(const Mesh2D& m, double value) {
  return std::vector<double>(static_cast<std::size_t>(m.num_triangles()) * 3, value);
}

double wavy_bed(double x, double y) { return -20.0 + 3.0 * std::sin(x / 700.0) * std::cos(y / 900.0); }

// Physical gradient of prism basis `node` by inverting the Jacobian of the
// parent-to-physical map assembled from vertex and interface positions.
Vec3 chain_rule_gradient(const ColumnGrid& g, int prism, int node, double xi, double eta, double zeta) {
  const int col = g.column_of(prism);
  const int l = g.layer_of(prism);
  const Mesh2D& m = g.mesh();
  const Vec2 v0 = m.vertex(col, 0), v1 = m.vertex(col, 1), v2 = m.vertex(col, 2);
  const double pt = 0.5 * (1.0 + zeta), pb = 0.5 * (1.0 - zeta);
  const std::array<double, 3> dxi = {-1.0, 1.0, 0.0}, deta = {-1.0, 0.0, 1.0};
  const std::array<double, 3> ph = {1.0 - xi - eta, xi, eta};
  double zx = 0.0, ze = 0.0, zz = 0.0;
  for (int h = 0; h < 3; ++h) {
    const double zh = pt * g.z(col, l, h) + pb * g.z(col, l + 1, h);
    zx += dxi[h] * zh;
    ze += deta[h] * zh;
    zz += ph[h] * 0.5 * (g.z(col, l, h) - g.z(col, l + 1, h));
  }
  // Rows: d(x, y, z)/d(parent coordinate).
  testing::Dense jt(3);
  jt(0, 0) = v1.x - v0.x; jt(0, 1) = v1.y - v0.y; jt(0, 2) = zx;
  jt(1, 0) = v2.x - v0.x; jt(1, 1) = v2.y - v0.y; jt(1, 2) = ze;
  jt(2, 0) = 0.0;         jt(2, 1) = 0.0;         jt(2, 2) = zz;
  const int h = node % 3;
  const double pz = node / 3 == 0 ? pt : pb;
  const double dpz = node / 3 == 0 ? 0.5 : -0.5;
  const auto grad = testing::gauss_solve(jt, {dxi[h] * pz, deta[h] * pz, ph[h] * dpz});
  return {grad[0], grad[1], grad[2]};
}

}  // namespace

TEST_CASE("flat bed gives unit half-thickness for five layers") {
  auto mesh = testing::basin(2, 2, 100.0, 100.0, [](double, double) { return -10.0; });
  const ColumnGrid g = extrude(mesh, LayerPolicy::uniform(5), uniform_eta(*mesh, 0.0));
  for (int p = 0; p < g.num_prisms(); ++p) {
    for (int h = 0; h < 3; ++h) CHECK(g.jz(p, h) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("layer thicknesses telescope to the water depth") {
  auto mesh = testing::basin(6, 5, 5000.0, 4000.0, wavy_bed);
  std::mt19937_64 rng(3);
  auto eta = testing::random_vector(rng, static_cast<std::size_t>(mesh->num_triangles()) * 3, -0.5, 0.5);
  const ColumnGrid g = extrude(mesh, LayerPolicy::uniform(7), eta);
  for (int c = 0; c < g.num_columns(); ++c) {
    for (int h = 0; h < 3; ++h) {
      double sum = 0.0;
      for (int l = 0; l < g.layers(c); ++l) sum += 2.0 * g.jz(g.prism_offset(c) + l, h);
      CHECK(std::abs(sum - g.depth(c, h)) < 1e-12 * g.depth(c, h));
    }
  }

  SUBCASE("moving the mesh keeps the telescoping") {
    auto eta_new = testing::random_vector(rng, eta.size(), -0.5, 0.5);
    const ColumnGrid moved = update_moving_mesh(g, eta_new, 30.0);
    for (int c = 0; c < moved.num_columns(); ++c) {
      for (int h = 0; h < 3; ++h) {
        double sum = 0.0;
        for (int l = 0; l < moved.layers(c); ++l) sum += 2.0 * moved.jz(moved.prism_offset(c) + l, h);
        CHECK(std::abs(sum - (eta_new[3 * c + h] - mesh->bed_at(c, h))) < 1e-12 * 20.0);
      }
    }
  }
}

TEST_CASE("mesh velocity of a linear sigma stretch") {
  auto mesh = testing::basin(1, 1, 10.0, 10.0, [](double, double) { return -5.0; });
  const ColumnGrid g = extrude(mesh, LayerPolicy::uniform(1), uniform_eta(*mesh, 0.0));
  const ColumnGrid same = update_moving_mesh(g, uniform_eta(*mesh, 0.0), 1.0);
  const ColumnGrid raised = update_moving_mesh(g, uniform_eta(*mesh, 0.1), 1.0);
  for (int c = 0; c < g.num_columns(); ++c) {
    for (int h = 0; h < 3; ++h) {
      CHECK(same.wm(c, 0, h) == 0.0);
      CHECK(same.wm(c, 1, h) == 0.0);
      CHECK(raised.wm(c, 0, h) == doctest::Approx(0.1).epsilon(1e-12));
      CHECK(raised.wm(c, 1, h) == 0.0);
    }
  }
}

TEST_CASE("sloped bed with flat surface keeps vertical side faces") {
  auto mesh = testing::basin(3, 3, 300.0, 300.0, [](double x, double) { return -10.0 - 0.01 * x; });
  const ColumnGrid g = extrude(mesh, LayerPolicy::uniform(3), uniform_eta(*mesh, 0.0));
  for (int p = 0; p < g.num_prisms(); ++p) {
    for (int k = 0; k < 3; ++k) CHECK(std::abs(g.lateral_normal(p, k).z) < 1e-15);
    if (g.layer_of(p) == 0) {
      const Vec3 n = g.top_normal(p);
      CHECK(n.z == doctest::Approx(1.0));
      CHECK(std::abs(n.x) < 1e-15);
    }
  }
}

TEST_CASE("dry column is rejected") {
  auto mesh = testing::basin(1, 1, 10.0, 10.0, [](double, double) { return -1.0; });
  CHECK_THROWS_AS(extrude(mesh, LayerPolicy::uniform(2), uniform_eta(*mesh, -1.0)), DryColumn);
}

TEST_CASE("depth-thresholded layer counts") {
  const LayerPolicy p = LayerPolicy::depth_thresholded({{0.0, 2}, {10.0, 5}, {50.0, 9}});
  CHECK(p.count_for_depth(3.0) == 2);
  CHECK(p.count_for_depth(10.0) == 5);
  CHECK(p.count_for_depth(49.9) == 5);
  CHECK(p.count_for_depth(400.0) == 9);
}

TEST_CASE("triangle quadrature integrates monomials up to degree four") {
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; a + b <= 4; ++b) {
      double q = 0.0;
      for (const auto& pt : ref::triangle_rule()) q += pt.weight * std::pow(pt.xi, a) * std::pow(pt.eta, b);
      // a! b! / (a + b + 2)!
      const double exact = std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
      CHECK(std::abs(q - exact) < 1e-14);
      CHECK(std::abs(ref::monomial_integral(a, b) - exact) < 1e-15);
    }
  }
}

TEST_CASE("prism basis is a nodal partition of unity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    double xi = u(rng), eta = u(rng);
    if (xi + eta > 1.0) { xi = 1.0 - xi; eta = 1.0 - eta; }
    const double zeta = 2.0 * u(rng) - 1.0;
    double sum = 0.0;
    for (int i = 0; i < 6; ++i) sum += ref::phi(i, xi, eta, zeta);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  }
  const std::array<std::array<double, 3>, 6> nodes = {{{0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {0, 0, -1}, {1, 0, -1}, {0, 1, -1}}};
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) CHECK(ref::phi(i, nodes[j][0], nodes[j][1], nodes[j][2]) == (i == j ? 1.0 : 0.0));
  }
}

TEST_CASE("interface operators") {
  CHECK(iface_mean(1.0, 3.0) == 2.0);
  CHECK(iface_diff(1.0, 3.0) == -1.0);
  CHECK(iface_max(1.0, 3.0) == 3.0);
  CHECK(iface_upwind(1.0, 3.0, 0.0) == 1.0);
  CHECK(iface_upwind(1.0, 3.0, -1e-300) == 3.0);
  CHECK(iface_mean(2.5, 2.5) == 2.5);
  CHECK(iface_diff(2.5, 2.5) == 0.0);
  std::mt19937_64 rng(5);
  for (double a : testing::random_vector(rng, 50)) {
    const double b = a * 0.37 - 0.2;
    CHECK(iface_mean(a, b) + iface_diff(a, b) == doctest::Approx(a).epsilon(1e-15));
    CHECK(iface_mean(a, b) - iface_diff(a, b) == doctest::Approx(b).epsilon(1e-15));
  }
}

TEST_CASE("interior penalty coefficient") {
  PenaltyParams p;  // N0 = 5, order 1, dim 3
  CHECK(penalty_sigma(p, 10.0, 20.0) == doctest::Approx(40.0 / 60.0).epsilon(1e-15));
  CHECK(penalty_sigma(p, 1.0, 1.0) == doctest::Approx(20.0 / 3.0).epsilon(1e-15));
  CHECK(penalty_sigma(p, 1e12, 1e12) < 1e-11);
  CHECK_THROWS_AS(penalty_sigma(p, 0.0, 1.0), NonPositiveLength);
  CHECK_THROWS_AS(penalty_sigma(p, 1.0, -2.0), NonPositiveLength);
}

TEST_CASE("mesh-aligned velocity split") {
  const SplitVelocity flat = split_velocity({0.3, -0.2}, 0.01, {0.0, 0.0, 2.0});
  CHECK(flat.tangent == Vec3{0.3, -0.2, 0.0});
  CHECK(flat.vertical == 0.01);

  const SplitVelocity s = split_velocity({1.0, 0.0}, 0.0, {0.5, 0.0, 1.0});
  CHECK(s.tangent == Vec3{1.0, 0.0, -0.5});
  CHECK(s.vertical == 0.5);

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = testing::random_vector(rng, 6);
    const Vec3 m{r[0], r[1], 1.0 + std::abs(r[2])};
    const SplitVelocity v = split_velocity({r[3], r[4]}, r[5], m);
    CHECK(std::abs(dot(v.tangent, m)) < 1e-15);
    CHECK(v.tangent.x == r[3]);
    CHECK(v.tangent.y == r[4]);
    CHECK(v.tangent.z + v.vertical == doctest::Approx(r[5]).epsilon(1e-14));
  }
  CHECK_THROWS_AS(split_velocity({1.0, 0.0}, 0.0, {1.0, 0.0, 0.0}), DegenerateLayer);
}

TEST_CASE("diffusivity split") {
  const TensorDiffusivity iso = split_diffusivity(Mat3::diag(2.0, 2.0, 2.0), {0.0, 0.0, 4.0});
  CHECK(iso.implicit_zz == 2.0);
  CHECK(iso.explicit_part(2, 2) == 0.0);

  const TensorDiffusivity zero = split_diffusivity(Mat3{}, {0.3, 0.1, 1.0});
  CHECK(zero.implicit_zz == 0.0);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(zero.explicit_part(i, j) == 0.0);
  }

  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    // D = B B^T + I is symmetric positive definite.
    const auto b = testing::random_vector(rng, 9);
    Mat3 d;
    double dnorm = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) d(i, j) += b[3 * i + k] * b[3 * j + k];
        d(i, j) += i == j ? 1.0 : 0.0;
        dnorm = std::max(dnorm, std::abs(d(i, j)));
      }
    }
    const auto r = testing::random_vector(rng, 2);
    const Vec3 m{r[0], r[1], 1.0};
    const TensorDiffusivity t = split_diffusivity(d, m);
    CHECK(t.implicit_zz >= 0.0);
    CHECK(std::abs(quad_form(m, t.explicit_part, m)) <= 1e-14 * dnorm * 4.0);
  }
  CHECK_THROWS_AS(split_diffusivity(Mat3::diag(1, 1, 1), {1.0, 0.0, 0.0}), DegenerateLayer);
}

TEST_CASE("gradient decomposition") {
  auto mesh = testing::basin(3, 3, 900.0, 900.0, wavy_bed);
  std::mt19937_64 rng(29);
  auto eta = testing::random_vector(rng, static_cast<std::size_t>(mesh->num_triangles()) * 3, -0.3, 0.3);
  const ColumnGrid g = extrude(mesh, LayerPolicy::uniform(4), eta);

  SUBCASE("sum of parts matches the chain rule") {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int p = 0; p < g.num_prisms(); p += 3) {
      const double xi = 0.2 * u(rng), et = 0.5 * u(rng), zeta = 2.0 * u(rng) - 1.0;
      for (int node = 0; node < 6; ++node) {
        const auto [along, across] = gradient_decompose(g, p, node, xi, et, zeta);
        const Vec3 want = chain_rule_gradient(g, p, node, xi, et, zeta);
        const Vec3 got = along + across;
        const double scale = std::max(norm(want), 1e-300);
        CHECK(norm(got - want) / scale < 1e-13);
        CHECK(along.z == 0.0);
      }
    }
  }
  SUBCASE("vertically constant field has no across-layer part") {
    for (int p = 0; p < g.num_prisms(); p += 5) {
      Vec3 across_sum{};
      for (int h = 0; h < 3; ++h) {
        // phi_top + phi_bottom at the same horizontal node is constant in zeta.
        across_sum = across_sum + gradient_decompose(g, p, h, 0.2, 0.3, 0.1).second +
                     gradient_decompose(g, p, h + 3, 0.2, 0.3, 0.1).second;
      }
      CHECK(norm(across_sum) < 1e-15);
    }
  }
}

TEST_CASE("flat layers reduce the along-layer gradient to the horizontal one") {
  auto mesh = testing::basin(2, 2, 50.0, 50.0, [](double, double) { return -8.0; });
  const ColumnGrid g = extrude(mesh, LayerPolicy::uniform(2), std::vector<double>(mesh->num_triangles() * 3, 0.0));
  for (int p = 0; p < g.num_prisms(); ++p) {
    const auto gh = mesh->basis_gradients(g.column_of(p));
    for (int node = 0; node < 6; ++node) {
      const auto [along, across] = gradient_decompose(g, p, node, 0.25, 0.25, 0.5);
      const double pz = ref::phi_z(node / 3, 0.5);
      CHECK(along.x == doctest::Approx(pz * gh[node % 3].x).epsilon(1e-15));
      CHECK(along.y == doctest::Approx(pz * gh[node % 3].y).epsilon(1e-15));
      CHECK(across.x == 0.0);
      CHECK(across.y == 0.0);
    }
  }
}
