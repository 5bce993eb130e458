#include "prismdg/reference.hpp"

#include <algorithm>
#include <string>

#include "prismdg/column_grid.hpp"
#include "prismdg/errors.hpp"

namespace prismdg {
namespace ref {

const std::array<TrianglePoint, kTrianglePoints>& triangle_rule() {
  // Symmetric degree-4 rule; area-normalized weights halved for the parent.
  constexpr double a = 0.4459484909159648863183293;
  constexpr double a2 = 0.1081030181680702273633415;
  constexpr double wa = 0.5 * 0.2233815896780114656950070;
  constexpr double b = 0.0915762135097707434595715;
  constexpr double b2 = 0.8168475729804585130808571;
  constexpr double wb = 0.5 * 0.1099517436553218676383263;
  static const std::array<TrianglePoint, kTrianglePoints> rule = {
      TrianglePoint{a, a, wa},   TrianglePoint{a2, a, wa}, TrianglePoint{a, a2, wa},
      TrianglePoint{b, b, wb},   TrianglePoint{b2, b, wb}, TrianglePoint{b, b2, wb}};
  return rule;
}

double monomial_integral(int a, int b) {
  double num = 1.0;
  for (int i = 2; i <= a; ++i) num *= i;
  for (int i = 2; i <= b; ++i) num *= i;
  double den = 1.0;
  for (int i = 2; i <= a + b + 2; ++i) den *= i;
  return num / den;
}

}  // namespace ref

double penalty_sigma(const PenaltyParams& params, double l_int, double l_ext) {
  if (!(l_int > 0.0) || !(l_ext > 0.0)) {
    throw NonPositiveLength("penalty length scales must be positive (got " +
                            std::to_string(l_int) + ", " + std::to_string(l_ext) + ")");
  }
  const double o = params.order;
  const double d = params.dim;
  return params.n0 * (o + 1.0) * (o + d) / (2.0 * d * std::min(l_int, l_ext));
}

std::pair<Vec3, Vec3> gradient_decompose(const ColumnGrid& grid, int prism, int node, double xi,
                                         double eta, double zeta) {
  const int h = node % 3;
  const int v = node / 3;
  const Vec2 gh = grid.mesh().basis_gradients(grid.column_of(prism))[h];
  const double pz = ref::phi_z(v, zeta);
  const Vec3 along{pz * gh.x, pz * gh.y, 0.0};
  const Vec3 m = grid.m_vector(prism, xi, eta, zeta);
  const double dzeta = ref::phi_h(h, xi, eta) * ref::dphi_z(v);
  return {along, dzeta * m};
}

Vec3 basis_gradient(const ColumnGrid& grid, int prism, int node, double xi, double eta,
                    double zeta) {
  const auto [a, b] = gradient_decompose(grid, prism, node, xi, eta, zeta);
  return a + b;
}

SplitVelocity split_velocity(Vec2 u, double w, Vec3 m) {
  if (m.z == 0.0) throw DegenerateLayer("m_z = 0: layer has zero thickness");
  const double c = (m.x * u.x + m.y * u.y) / m.z;
  return {{u.x, u.y, -c}, w + c};
}

Mat3 Mat3::diag(double x, double y, double z) {
  Mat3 m;
  m.a[0][0] = x;
  m.a[1][1] = y;
  m.a[2][2] = z;
  return m;
}

Vec3 operator*(const Mat3& m, Vec3 v) {
  return {m.a[0][0] * v.x + m.a[0][1] * v.y + m.a[0][2] * v.z,
          m.a[1][0] * v.x + m.a[1][1] * v.y + m.a[1][2] * v.z,
          m.a[2][0] * v.x + m.a[2][1] * v.y + m.a[2][2] * v.z};
}

double quad_form(Vec3 u, const Mat3& m, Vec3 v) { return dot(u, m * v); }

TensorDiffusivity split_diffusivity(const Mat3& d, Vec3 m) {
  if (m.z == 0.0) throw DegenerateLayer("m_z = 0: layer has zero thickness");
  TensorDiffusivity out;
  out.full = d;
  out.implicit_zz = quad_form(m, d, m) / (m.z * m.z);
  out.explicit_part = d;
  out.explicit_part(2, 2) -= out.implicit_zz;
  return out;
}

}  // namespace prismdg
