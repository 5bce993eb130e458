#include <doctest.h>

#include <cmath>

#include "prismdg/errors.hpp"
#include "prismdg/exec.hpp"
#include "prismdg/external2d.hpp"
#include "prismdg/scenarios.hpp"
#include "support.hpp"

using namespace prismdg;

namespace {

double bumpy(double x, double y) { return -12.0 + 4.0 * std::exp(-((x - 4e3) * (x - 4e3) + (y - 5e3) * (y - 5e3)) / 4e6); }

// Integral of a P1-DG field: each node carries a third of the triangle area.
double integral(const Mesh2D& m, const std::vector<double>& f) {
  double s = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) s += m.area(t) / 3.0 * (f[3 * t] + f[3 * t + 1] + f[3 * t + 2]);
  return s;
}

}  // namespace

TEST_CASE("lake at rest has an exactly zero residual") {
  auto mesh = testing::basin(7, 6, 1e4, 1e4, bumpy);
  External2D ext(mesh, PhysParams{});
  const State2D s = State2D::at_rest(*mesh, 0.0);
  std::vector<double> r_eta;
  std::vector<Vec2> r_q;
  ext.rhs_free_surface(s, r_eta);
  ext.rhs_depth_momentum(s, r_q);
  for (double r : r_eta) CHECK(r == 0.0);
  for (const Vec2& r : r_q) CHECK(r == Vec2{});
}

TEST_CASE("uniform source loads every node with a third of the area") {
  auto mesh = testing::basin(3, 2, 600.0, 400.0, bumpy);
  External2D ext(mesh, PhysParams{});
  State2D s = State2D::at_rest(*mesh, 0.0);
  const double src = 2.5e-5;
  s.source.assign(s.eta.size(), src);
  std::vector<double> r;
  ext.rhs_free_surface(s, r);
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) CHECK(r[3 * t + k] == doctest::Approx(src * mesh->area(t) / 3.0).epsilon(1e-13));
  }
}

TEST_CASE("linear transport in a walled basin has zero net residual") {
  const double lx = 3e3, ly = 2e3;
  auto mesh = testing::basin(6, 4, lx, ly, [](double, double) { return -10.0; });
  External2D ext(mesh, PhysParams{});
  State2D s = State2D::at_rest(*mesh, 0.0);
  for (int t = 0; t < mesh->num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) s.transport[3 * t + k] = {mesh->vertex(t, k).x, 0.0};
  }
  std::vector<double> r;
  ext.rhs_free_surface(s, r);
  double sum = 0.0, scale = 0.0;
  for (double x : r) {
    sum += x;
    scale = std::max(scale, std::abs(x));
  }
  CHECK(scale > 0.0);
  CHECK(std::abs(sum) < 1e-12 * scale * r.size());
}

TEST_CASE("subcycling conserves volume in a closed basin") {
  auto mesh = testing::basin(10, 10, 1e4, 1e4, bumpy);
  PhysParams p;
  External2D ext(mesh, p);
  State2D s = State2D::at_rest(*mesh, 0.0);
  s.eta = interpolate_2d(*mesh, [](double x, double y) { return 0.2 * std::exp(-((x - 3e3) * (x - 3e3) + (y - 6e3) * (y - 6e3)) / 2e6); });
  const double v0 = integral(*mesh, s.eta);
  CHECK(ext.diagnostics(s).volume == doctest::Approx(v0).epsilon(1e-14));
  const double dt = 0.4 * p.cfl_limit / ext.courant(s, 1.0);
  SerialExecutor exec(mesh->num_triangles());
  const SubcycleResult res = ext.subcycle(s, 200, dt, exec);
  CHECK(res.steps == 200);
  CHECK(std::abs(integral(*mesh, s.eta) - v0) <= 1e-12 * std::abs(v0));
  CHECK(s.time == doctest::Approx(200 * dt));
}

TEST_CASE("one external step returns its own transport as the mean") {
  auto mesh = testing::basin(4, 4, 1e4, 1e4, bumpy);
  PhysParams p;
  p.mean_transport = MeanTransport::StepEnd;
  External2D ext(mesh, p);
  State2D s = State2D::at_rest(*mesh, 0.0);
  s.eta = interpolate_2d(*mesh, [](double x, double) { return 0.05 * std::cos(3.14159 * x / 1e4); });
  SerialExecutor exec(mesh->num_triangles());
  const SubcycleResult res = ext.subcycle(s, 1, 0.3 * p.cfl_limit / ext.courant(s, 1.0), exec);
  CHECK(res.mean_transport == s.transport);
}

TEST_CASE("rest state without forcing has zero mean transport and forcing") {
  auto mesh = testing::basin(4, 4, 1e4, 1e4, bumpy);
  External2D ext(mesh, PhysParams{});
  State2D s = State2D::at_rest(*mesh, 0.0);
  SerialExecutor exec(mesh->num_triangles());
  const SubcycleResult res = ext.subcycle(s, 10, 1.0, exec);
  for (const Vec2& q : res.mean_transport) CHECK(q == Vec2{});
  for (const Vec2& f : res.f2d) CHECK(f == Vec2{});
}

TEST_CASE("courant violations are refused") {
  auto mesh = testing::basin(4, 4, 1e3, 1e3, bumpy);
  PhysParams p;
  External2D ext(mesh, p);
  State2D s = State2D::at_rest(*mesh, 0.0);
  SerialExecutor exec(mesh->num_triangles());
  const double dt_limit = p.cfl_limit / ext.courant(s, 1.0);
  CHECK_THROWS_AS(ext.subcycle(s, 1, 1.01 * dt_limit, exec), CflViolation);
  CHECK_NOTHROW(ext.subcycle(s, 1, 0.5 * dt_limit, exec));
}
