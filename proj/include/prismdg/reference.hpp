#pragma once

#include <array>
#include <utility>

#include "prismdg/vec.hpp"

namespace prismdg {

class ColumnGrid;

// P1 reference elements and quadrature.
//
// Parent triangle: (0,0), (1,0), (0,1); horizontal node k sits on vertex k.
// Parent segment: zeta in [-1, 1]; vertical node 0 is the top (zeta = 1).
// Prism node i = v*3 + h with v the vertical and h the horizontal index.
namespace ref {

struct TrianglePoint {
  double xi;
  double eta;
  double weight;  // weights sum to 1/2 (parent triangle area)
};

// 6-point rule, exact for degree 4.
inline constexpr int kTrianglePoints = 6;
const std::array<TrianglePoint, kTrianglePoints>& triangle_rule();

// 2-point Gauss on [-1, 1] (weights 1, 1), exact for degree 3.
inline constexpr int kLinePoints = 2;
inline constexpr double kGauss = 0.5773502691896257645091488;
inline constexpr std::array<double, kLinePoints> kLineZeta = {-kGauss, kGauss};
inline constexpr std::array<double, kLinePoints> kLineWeight = {1.0, 1.0};

// The same rule mapped to an edge parameter s in [0, 1]. The barycentric
// pairs are stored rather than recomputed so that the two triangles sharing
// an edge evaluate bitwise-identical interpolants: point g seen from one
// side is point 1-g seen from the other, with the pair swapped.
inline constexpr double kEdgeA = 0.7886751345948128822545744;  // (1 + 1/sqrt3)/2
inline constexpr double kEdgeB = 0.2113248654051871177454256;  // (1 - 1/sqrt3)/2
struct EdgePoint {
  double lam0;  // weight of the edge's first vertex
  double lam1;  // weight of the edge's second vertex
  double s;
  double weight;  // weights sum to 1
};
inline constexpr std::array<EdgePoint, 2> kEdgeRule = {
    EdgePoint{kEdgeA, kEdgeB, kEdgeB, 0.5}, EdgePoint{kEdgeB, kEdgeA, kEdgeA, 0.5}};

// Horizontal basis.
inline double phi_h(int k, double xi, double eta) {
  return k == 0 ? 1.0 - xi - eta : (k == 1 ? xi : eta);
}
// Parent gradient (d/dxi, d/deta) of phi_h.
inline Vec2 dphi_h(int k) {
  return k == 0 ? Vec2{-1.0, -1.0} : (k == 1 ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0});
}
// Parent coordinates of a point on local edge k.
inline Vec2 edge_point(int k, double lam0, double lam1) {
  constexpr std::array<Vec2, 3> v = {Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
  return lam0 * v[k] + lam1 * v[(k + 1) % 3];
}
// Horizontal basis values on local edge k at barycentric pair (lam0, lam1).
inline std::array<double, 3> phi_h_edge(int k, double lam0, double lam1) {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  out[k] = lam0;
  out[(k + 1) % 3] = lam1;
  return out;
}

// Vertical basis: v = 0 top, v = 1 bottom.
inline double phi_z(int v, double zeta) { return v == 0 ? 0.5 * (1.0 + zeta) : 0.5 * (1.0 - zeta); }
inline double dphi_z(int v) { return v == 0 ? 0.5 : -0.5; }

inline double phi(int i, double xi, double eta, double zeta) {
  return phi_h(i % 3, xi, eta) * phi_z(i / 3, zeta);
}

// Integral of xi^a eta^b over the parent triangle: a! b! / (a+b+2)!.
double monomial_integral(int a, int b);

}  // namespace ref

// Interface operators on a (interior, exterior) pair.
inline double iface_mean(double a_int, double a_ext) { return 0.5 * (a_int + a_ext); }
inline double iface_diff(double a_int, double a_ext) { return 0.5 * (a_int - a_ext); }
inline double iface_max(double a_int, double a_ext) { return a_int >= a_ext ? a_int : a_ext; }
inline double iface_upwind(double a_int, double a_ext, double normal_velocity) {
  return normal_velocity >= 0.0 ? a_int : a_ext;
}

struct PenaltyParams {
  double n0 = 5.0;   // average neighbor count
  double order = 1.0;
  double dim = 3.0;
};

// Interior penalty coefficient N0 (o+1)(o+d) / (2 d min(L_int, L_ext)).
// Throws NonPositiveLength.
double penalty_sigma(const PenaltyParams& params, double l_int, double l_ext);

// Gradient of prism basis function `node` at a parent point, split into the
// along-slice part (phi_z grad_h phi_h, zero vertical component) and the
// m * dphi/dzeta part. Their sum is the physical gradient.
std::pair<Vec3, Vec3> gradient_decompose(const ColumnGrid& grid, int prism, int node, double xi,
                                         double eta, double zeta);

// Physical gradient of basis function `node` at a parent point.
Vec3 basis_gradient(const ColumnGrid& grid, int prism, int node, double xi, double eta,
                    double zeta);

struct SplitVelocity {
  Vec3 tangent;    // (u, v, -m_h.u / m_z), orthogonal to m
  double vertical;  // w + m_h.u / m_z
};

// Throws DegenerateLayer if m_z == 0.
SplitVelocity split_velocity(Vec2 u, double w, Vec3 m);

struct Mat3 {
  std::array<std::array<double, 3>, 3> a{};

  static Mat3 diag(double x, double y, double z);
  double operator()(int i, int j) const { return a[i][j]; }
  double& operator()(int i, int j) { return a[i][j]; }
};

Vec3 operator*(const Mat3& m, Vec3 v);
double quad_form(Vec3 u, const Mat3& m, Vec3 v);

struct TensorDiffusivity {
  Mat3 full;
  double implicit_zz = 0.0;  // D_i: coefficient on e_z (x) e_z
  Mat3 explicit_part;        // D - D_i e_z (x) e_z
};

// Throws DegenerateLayer if m_z == 0.
TensorDiffusivity split_diffusivity(const Mat3& d, Vec3 m);

}  // namespace prismdg
