#pragma once

#include <span>
#include <vector>

#include "prismdg/internal3d.hpp"

namespace prismdg {

// Kinematic stresses (m^2/s^2) at the 2D nodes, 3 per triangle.
struct Stresses {
  std::vector<Vec2> surface;
  std::vector<Vec2> bed;
};

// tau_s = wind / rho0 and tau_b = -Cd |u_b| u_b from the bed nodes of u.
Stresses compute_stresses(const ColumnGrid& grid, const PhysParams& p, const Field& u, double time,
                          std::span<const int> cols);

// Horizontal momentum residual: advection by `transport` (when enabled),
// horizontal viscosity, Coriolis and the baroclinic pressure gradient r.
// Overwrites the listed columns of out.
void compute_f3dh(const ColumnGrid& grid, const PhysParams& p, const Field& u, const Field& transport,
                  std::span<const double> stab, const Field& r, Field& out, std::span<const int> cols);

// Nodal depth-integrated 3D forcing for the external mode:
// M_h^{-1} (vertical sum of F3Dh) + tau_s + tau_b.
void f3d_to_2d(const ColumnGrid& grid, const Field& f3dh, const Stresses& st, std::span<const int> cols,
               std::vector<Vec2>& out);

// Surface and bed stress loads on the top and bottom rows of a column.
void add_stress_loads(const ColumnGrid& grid, const Stresses& st, Field& out, std::span<const int> cols);

// External-mode forcing distributed over the column: each layer takes its
// thickness fraction Jz / H of f2d, so the vertical sum is M_h f2d.
void add_depth_mean_forcing(const ColumnGrid& grid, std::span<const Vec2> f2d, Field& out,
                            std::span<const int> cols);

// Mass-weighted update of a prism field over a step of length h:
//   implicit: (M1 - h A) x1 = M0 x0 + h R
//   explicit:  M1 x1       = M0 x0 + h (R + A xe)
// A is assembled on `eval` with interface velocities from `motion`; M0 and
// M1 come from `before` and `motion`.
void advance_vertical(const ColumnGrid& before, const ColumnGrid& eval, const ColumnGrid& motion,
                      const Field& wtilde, const VerticalCoefficients& coeffs, double h, bool implicit,
                      const Field& x0, const Field& xe, const Field& residual, Field& x1,
                      std::span<const int> cols);

}  // namespace prismdg
