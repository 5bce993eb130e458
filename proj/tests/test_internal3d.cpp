#include <doctest.h>

#include <cmath>
#include <random>

#include "prismdg/column_grid.hpp"
#include "prismdg/external2d.hpp"
#include "prismdg/internal3d.hpp"
#include "prismdg/params.hpp"
#include "prismdg/reference.hpp"
#include "support.hpp"

using namespace prismdg;

namespace {

std::vector<double> eta_field(const Mesh2D& m, const std::function<double(double, double)>& f) {
  std::vector<double> eta(static_cast<std::size_t>(m.num_triangles()) * 3);
  for (int t = 0; t < m.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) eta[3 * t + k] = f(m.vertex(t, k).x, m.vertex(t, k).y);
  }
  return eta;
}

std::vector<double> zero_stab(const Mesh2D& m) {
  return std::vector<double>(static_cast<std::size_t>(m.num_triangles()) * kEdgeSamples, 0.0);
}

bool interior_column(const Mesh2D& m, int c) {
  return m.neighbor(c, 0) >= 0 && m.neighbor(c, 1) >= 0 && m.neighbor(c, 2) >= 0;
}

double sloped(double x, double y) { return -15.0 - 0.002 * x + 0.001 * y; }

}  // namespace

TEST_CASE("prism mass matrix") {
  auto mesh = testing::basin(3, 3, 900.0, 600.0, sloped);
  std::mt19937_64 rng(71);
  auto eta = testing::random_vector(rng, static_cast<std::size_t>(mesh->num_triangles()) * 3, -0.4, 0.4);
  const ColumnGrid g = extrude(mesh, LayerPolicy::uniform(3), eta);
  for (int p = 0; p < g.num_prisms(); ++p) {
    const PrismGeom geo = prism_geom(g, p);
    const auto m = prism_mass(geo);
    double total = 0.0;
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        total += m[6 * i + j];
        CHECK(m[6 * i + j] == doctest::Approx(m[6 * j + i]).epsilon(1e-15));
      }
    }
    // Summed entries integrate the Jacobian: prism volume.
    const double volume = geo.j2d * (geo.jz[0] + geo.jz[1] + geo.jz[2]) / 3.0;
    CHECK(total == doctest::Approx(volume).epsilon(1e-13));

    const auto x = testing::random_vector(rng, 6);
    std::vector<double> y(6, 0.0);
    prism_mass_apply(geo, x.data(), y.data());
    prism_mass_solve(geo, y.data());
    CHECK(testing::rel_err(y, x) < 1e-12);
  }
}

TEST_CASE("transport projection") {
  auto mesh = testing::basin(2, 2, 400.0, 400.0, [](double, double) { return -12.0; });
  const ColumnGrid g = extrude(mesh, LayerPolicy::uniform(4), std::vector<double>(mesh->num_triangles() * 3, 0.0));
  Field u(2, g.layer_counts()), q(2, g.layer_counts());
  SUBCASE("zero velocity") {
    project_transport(g, u, q, {});
    CHECK(testing::max_abs(q.data()) == 0.0);
  }
  SUBCASE("constant velocity on constant thickness") {
    for (int p = 0; p < g.num_prisms(); ++p) {
      for (int k = 0; k < 6; ++k) {
        u.at(0, k, p) = 0.3;
        u.at(1, k, p) = -0.1;
      }
    }
    project_transport(g, u, q, {});
    for (int p = 0; p < g.num_prisms(); ++p) {
      for (int k = 0; k < 6; ++k) {
        CHECK(q.at(0, k, p) == doctest::Approx(1.5 * 0.3).epsilon(1e-13));
        CHECK(q.at(1, k, p) == doctest::Approx(1.5 * -0.1).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("consistent transport correction") {
  auto mesh = testing::basin(1, 1, 100.0, 100.0, [](double, double) { return -10.0; });
  const ColumnGrid g = extrude(mesh, LayerPolicy::uniform(2), std::vector<double>(6, 0.0));
  Field q(2, g.layer_counts()), qbar(2, g.layer_counts());
  // Each layer carries 5 m^2/s, split over its top and bottom nodes.
  for (int p = 0; p < g.num_prisms(); ++p) {
    for (int k = 0; k < 6; ++k) q.at(0, k, p) = 2.5;
  }
  SUBCASE("a matching mean leaves q unchanged") {
    std::vector<Vec2> mean(6, Vec2{10.0, 0.0});
    build_consistent_transport(g, q, mean, qbar, {});
    CHECK(qbar.data() == q.data());
  }
  SUBCASE("the defect is spread by thickness") {
    std::vector<Vec2> mean(6, Vec2{12.0, 0.0});
    build_consistent_transport(g, q, mean, qbar, {});
    for (int p = 0; p < g.num_prisms(); ++p) {
      for (int h = 0; h < 3; ++h) {
        CHECK(qbar.at(0, h, p) + qbar.at(0, h + 3, p) == doctest::Approx(6.0).epsilon(1e-15));
        CHECK(qbar.at(1, h, p) == 0.0);
      }
    }
    const auto sum = vertical_sum(qbar, std::vector<int>{0, 1}, 2);
    for (const Vec2& v : sum) CHECK(v.x == doctest::Approx(12.0).epsilon(1e-15));
  }
}

TEST_CASE("constant density under a flat surface has no pressure gradient") {
  auto mesh = testing::basin(3, 3, 900.0, 900.0, sloped);
  const ColumnGrid g = extrude(mesh, LayerPolicy::uniform(5), std::vector<double>(mesh->num_triangles() * 3, 0.0));
  Field rho(1, g.layer_counts()), r(2, g.layer_counts());
  std::fill(rho.data().begin(), rho.data().end(), 1.3);
  compute_r_rhs(g, PhysParams{}, rho, r, {});
  solve_columns(ColumnSystemKind::Dvu, g, r, {}, 0);
  CHECK(testing::max_abs(r.data()) < 1e-12);
}

TEST_CASE("linear density in x gives a pressure gradient growing with depth") {
  auto mesh = testing::basin(4, 4, 400.0, 400.0, [](double, double) { return -10.0; });
  const ColumnGrid g = extrude(mesh, LayerPolicy::uniform(4), std::vector<double>(mesh->num_triangles() * 3, 0.0));
  const double gamma = 1e-3;
  PhysParams p;
  Field rho(1, g.layer_counts()), r(2, g.layer_counts());
  for (int c = 0; c < g.num_columns(); ++c) {
    for (int l = 0; l < g.layers(c); ++l) {
      for (int k = 0; k < 6; ++k) rho.at(0, k, g.prism_offset(c) + l) = gamma * mesh->vertex(c, k % 3).x;
    }
  }
  compute_r_rhs(g, p, rho, r, {});
  solve_columns(ColumnSystemKind::Dvu, g, r, {}, 0);
  // Heavier water toward +x: r_x = g gamma (eta - z), so -r / rho0 pushes toward -x.
  for (int c = 0; c < g.num_columns(); ++c) {
    for (int l = 0; l < g.layers(c); ++l) {
      const int pr = g.prism_offset(c) + l;
      for (int k = 0; k < 6; ++k) {
        const double depth_below_surface = -g.z(c, l + k / 3, k % 3);
        CHECK(r.at(0, k, pr) == doctest::Approx(p.g * gamma * depth_below_surface).epsilon(1e-10));
        CHECK(std::abs(r.at(1, k, pr)) < 1e-12);
      }
    }
  }
}

TEST_CASE("vertical velocity diagnostics") {
  auto mesh = testing::basin(5, 5, 1000.0, 1000.0, [](double, double) { return -10.0; });
  const ColumnGrid g = extrude(mesh, LayerPolicy::uniform(3), std::vector<double>(mesh->num_triangles() * 3, 0.0));
  const auto stab = zero_stab(*mesh);
  Field q(2, g.layer_counts()), rhs(1, g.layer_counts());

  SUBCASE("no transport gives no vertical velocity") {
    compute_w_rhs(g, q, stab, rhs, {});
    solve_columns(ColumnSystemKind::Dvd, g, rhs, {}, 0);
    CHECK(testing::max_abs(rhs.data()) == 0.0);
  }
  SUBCASE("uniform transport is divergence free away from walls") {
    for (int p = 0; p < g.num_prisms(); ++p) {
      for (int k = 0; k < 6; ++k) {
        q.at(0, k, p) = 0.8;
        q.at(1, k, p) = -0.3;
      }
    }
    compute_w_rhs(g, q, stab, rhs, {});
    solve_columns(ColumnSystemKind::Dvd, g, rhs, {}, 0);
    for (int c = 0; c < g.num_columns(); ++c) {
      if (!interior_column(*mesh, c)) continue;
      for (int l = 0; l < g.layers(c); ++l) {
        for (int k = 0; k < 6; ++k) CHECK(std::abs(rhs.at(0, k, g.prism_offset(c) + l)) < 1e-12);
      }
    }
  }
  SUBCASE("flat layers make the layer-crossing velocity equal to w") {
    std::mt19937_64 rng(73);
    for (double& x : q.data()) x = std::uniform_real_distribution<double>(-1, 1)(rng);
    Field wt(1, g.layer_counts());
    compute_w_rhs(g, q, stab, rhs, {});
    compute_wtilde_rhs(g, q, stab, wt, {});
    solve_columns(ColumnSystemKind::Dvd, g, rhs, {}, 0);
    solve_columns(ColumnSystemKind::Dvd, g, wt, {}, 0);
    CHECK(testing::rel_err(wt.data(), rhs.data()) < 1e-12);
  }
}

TEST_CASE("a surface jump feeds the lateral stabilization") {
  auto mesh = testing::basin(2, 1, 200.0, 100.0, [](double, double) { return -10.0; });
  const ColumnGrid g = extrude(mesh, LayerPolicy::uniform(2), std::vector<double>(mesh->num_triangles() * 3, 0.0));
  Field q(2, g.layer_counts());
  auto stab = zero_stab(*mesh);
  const int c = 0;
  int edge = -1;
  for (int k = 0; k < 3; ++k) {
    if (mesh->neighbor(c, k) >= 0) edge = k;
  }
  REQUIRE(edge >= 0);
  stab[kEdgeSamples * c + 2 * edge] = 0.7;
  for (int l = 0; l < 2; ++l) {
    const int pr = g.prism_offset(c) + l;
    // Jz / H = 2.5 / 10 per unit of parent height (2 per layer).
    CHECK(lateral_transport(g, q, stab, pr, edge, 0, 0.0) == doctest::Approx(0.25 * 0.7).epsilon(1e-14));
    CHECK(lateral_transport(g, q, stab, pr, edge, 1, 0.0) == 0.0);
  }
}

TEST_CASE("conforming lateral neighbors share layers") {
  auto mesh = testing::basin(3, 2, 300.0, 200.0, sloped);
  const ColumnGrid g = extrude(mesh, LayerPolicy::uniform(3), std::vector<double>(mesh->num_triangles() * 3, 0.0));
  for (int p = 0; p < g.num_prisms(); ++p) {
    for (int k = 0; k < 3; ++k) {
      const int nb = lateral_neighbor(g, p, k);
      const int col_nb = mesh->neighbor(g.column_of(p), k);
      if (col_nb < 0) {
        CHECK(nb == -1);
      } else {
        CHECK(g.column_of(nb) == col_nb);
        CHECK(g.layer_of(nb) == g.layer_of(p));
      }
    }
  }
}
