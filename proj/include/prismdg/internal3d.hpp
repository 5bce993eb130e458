#pragma once

#include <array>
#include <span>
#include <vector>

#include "prismdg/column_grid.hpp"
#include "prismdg/column_solvers.hpp"
#include "prismdg/layout.hpp"
#include "prismdg/params.hpp"

namespace prismdg {

using Field = FieldSoA<double>;

// Geometry of one prism, gathered once per kernel visit.
struct PrismGeom {
  int prism = 0;
  int col = 0;
  int layer = 0;
  double j2d = 0.0;
  std::array<double, 3> jz{};
  std::array<double, 3> depth{};
  std::array<Vec2, 3> grad{};
  Vec2 top_slope;
  Vec2 bottom_slope;

  double jz_at(double xi, double eta) const;
  Vec2 slope(double zeta) const;
  // Physical gradient of node i's basis function.
  Vec3 basis_gradient(int i, double xi, double eta, double zeta) const;
  // Gradient along the layer (fixed zeta) of node i's basis function.
  Vec2 layer_gradient(int i, double zeta) const;
  double mean_height() const { return (2.0 / 3.0) * (jz[0] + jz[1] + jz[2]); }
};

PrismGeom prism_geom(const ColumnGrid& grid, int prism);

// M_ij = integral of phi_i phi_j J over the prism, node order v * 3 + h.
std::array<double, 36> prism_mass(const PrismGeom& g);
// y += M x for one prism.
void prism_mass_apply(const PrismGeom& g, const double* x, double* y);
// x <- M^{-1} x.
void prism_mass_solve(const PrismGeom& g, double* x);

// Prism id of the lateral neighbor across edge k, -1 on the boundary.
// Requires conforming layers.
int lateral_neighbor(const ColumnGrid& grid, int prism, int edge);

// Field value of component f at a point of prism p.
double eval(const Field& x, int f, int prism, double xi, double eta, double zeta);

// Stabilized normal transport through a lateral face at edge point gp and
// vertical coordinate zeta: n . mean(q) + mean(Jz/H) * S.
double lateral_transport(const ColumnGrid& grid, const Field& transport, std::span<const double> stab,
                         int prism, int edge, int gp, double zeta);

// Right-hand side of the hydrostatic pressure gradient column system
// (2 components). Only the listed columns are written.
void compute_r_rhs(const ColumnGrid& grid, const PhysParams& p, const Field& density, Field& rhs,
                   std::span<const int> cols);

// Continuity right-hand side for the true vertical velocity.
void compute_w_rhs(const ColumnGrid& grid, const Field& transport, std::span<const double> stab, Field& rhs,
                   std::span<const int> cols);

// Right-hand side for the velocity across the moving layers.
void compute_wtilde_rhs(const ColumnGrid& grid, const Field& transport, std::span<const double> stab,
                        Field& rhs, std::span<const int> cols);

// In-place column solves of a FieldSoA, batched through cells of width
// `cell_width` when positive, one column at a time otherwise.
void solve_columns(ColumnSystemKind kind, const ColumnGrid& grid, Field& field, std::span<const int> cols,
                   int cell_width);

// q: projection of Jz u onto the prism basis.
void project_transport(const ColumnGrid& grid, const Field& u, Field& q, std::span<const int> cols);

// q-bar = q + (Jz / H) (Q-bar - sum over vertical DOFs of q).
void build_consistent_transport(const ColumnGrid& grid, const Field& q, std::span<const Vec2> mean_transport,
                                Field& qbar, std::span<const int> cols);

// Sum over vertical DOFs of a 2-component field, per 2D node.
std::vector<Vec2> vertical_sum(const Field& x, std::span<const int> cols, int num_columns);

// Horizontal advection of `field` by `transport` (all components), added to out.
void add_horizontal_advection(const ColumnGrid& grid, const Field& field, const Field& transport,
                              std::span<const double> stab, Field& out, std::span<const int> cols);

// Explicit part of the split diffusion tensor diag(kh, kh, kv), added to out.
void add_horizontal_diffusion(const ColumnGrid& grid, double kh, const PenaltyParams& penalty, const Field& field,
                              Field& out, std::span<const int> cols);

struct VerticalCoefficients {
  double kh = 0.0;  // horizontal coefficient (enters the implicit part through the layer slope)
  double kv = 0.0;
  PenaltyParams penalty;
  bool advection = true;
};

// Banded matrix A of the vertical advection-diffusion terms of one column:
// the terms equal A x. `motion` supplies the mesh velocity at interfaces.
void assemble_vertical(const ColumnGrid& grid, const ColumnGrid& motion, const Field& wtilde,
                       const VerticalCoefficients& c, int col, BandedColumn<double>& a);

// out += A x for column col (every component of x).
void add_banded_product(const BandedColumn<double>& a, const Field& x, int col, Field& out);

}  // namespace prismdg
