#include "prismdg/momentum.hpp"

#include <cmath>

#include "prismdg/column_solvers.hpp"
#include "prismdg/errors.hpp"
#include "prismdg/external2d.hpp"

namespace prismdg {

Stresses compute_stresses(const ColumnGrid& grid, const PhysParams& p, const Field& u, double time,
                          std::span<const int> cols) {
  const std::size_t n = static_cast<std::size_t>(grid.num_columns()) * 3;
  Stresses st;
  st.surface.assign(n, Vec2{});
  st.bed.assign(n, Vec2{});
  const Vec2 wind = (1.0 / p.rho0) * p.wind_stress.at(time);
  for (int c : cols) {
    const int bottom = grid.prism_offset(c) + grid.layers(c) - 1;
    for (int h = 0; h < 3; ++h) {
      st.surface[3 * c + h] = wind;
      if (p.drag_cd != 0.0) {
        const Vec2 ub{u.at(0, 3 + h, bottom), u.at(1, 3 + h, bottom)};
        st.bed[3 * c + h] = (-p.drag_cd * norm(ub)) * ub;
      }
    }
  }
  return st;
}

void compute_f3dh(const ColumnGrid& grid, const PhysParams& p, const Field& u, const Field& transport,
                  std::span<const double> stab, const Field& r, Field& out, std::span<const int> cols) {
  for (int c : cols) {
    for (int l = 0; l < grid.layers(c); ++l) {
      for (int f = 0; f < 2; ++f) {
        for (int i = 0; i < 6; ++i) out.at(f, i, grid.prism_offset(c) + l) = 0.0;
      }
    }
  }
  if (p.momentum_advection) add_horizontal_advection(grid, u, transport, stab, out, cols);
  add_horizontal_diffusion(grid, p.kappa_h, p.penalty, u, out, cols);
  for (int c : cols) {
    for (int l = 0; l < grid.layers(c); ++l) {
      const int pr = grid.prism_offset(c) + l;
      const PrismGeom geo = prism_geom(grid, pr);
      // -f e_z x u = f (v, -u), and -r / rho0.
      double src[2][6];
      for (int i = 0; i < 6; ++i) {
        src[0][i] = p.coriolis * u.at(1, i, pr) - r.at(0, i, pr) / p.rho0;
        src[1][i] = -p.coriolis * u.at(0, i, pr) - r.at(1, i, pr) / p.rho0;
      }
      for (int f = 0; f < 2; ++f) {
        double y[6] = {};
        prism_mass_apply(geo, src[f], y);
        for (int i = 0; i < 6; ++i) out.at(f, i, pr) += y[i];
      }
    }
  }
}

void f3d_to_2d(const ColumnGrid& grid, const Field& f3dh, const Stresses& st, std::span<const int> cols,
               std::vector<Vec2>& out) {
  out.resize(static_cast<std::size_t>(grid.num_columns()) * 3);
  const std::vector<Vec2> sum = vertical_sum(f3dh, cols, grid.num_columns());
  for (int c : cols) {
    const double j = grid.mesh().jacobian(c);
    double fx[3], fy[3];
    for (int h = 0; h < 3; ++h) {
      fx[h] = sum[3 * c + h].x;
      fy[h] = sum[3 * c + h].y;
    }
    detail::apply_inverse_mass(j, fx);
    detail::apply_inverse_mass(j, fy);
    for (int h = 0; h < 3; ++h) out[3 * c + h] = Vec2{fx[h], fy[h]} + st.surface[3 * c + h] + st.bed[3 * c + h];
  }
}

void add_stress_loads(const ColumnGrid& grid, const Stresses& st, Field& out, std::span<const int> cols) {
  for (int c : cols) {
    const double j = grid.mesh().jacobian(c);
    const int top = grid.prism_offset(c);
    const int bottom = top + grid.layers(c) - 1;
    double sx[3], sy[3], bx[3], by[3];
    for (int h = 0; h < 3; ++h) {
      sx[h] = st.surface[3 * c + h].x;
      sy[h] = st.surface[3 * c + h].y;
      bx[h] = st.bed[3 * c + h].x;
      by[h] = st.bed[3 * c + h].y;
    }
    for (int h = 0; h < 3; ++h) {
      out.at(0, h, top) += mass_apply(j, sx, h);
      out.at(1, h, top) += mass_apply(j, sy, h);
      out.at(0, 3 + h, bottom) += mass_apply(j, bx, h);
      out.at(1, 3 + h, bottom) += mass_apply(j, by, h);
    }
  }
}

void add_depth_mean_forcing(const ColumnGrid& grid, std::span<const Vec2> f2d, Field& out,
                            std::span<const int> cols) {
  for (int c : cols) {
    double depth[3];
    for (int h = 0; h < 3; ++h) {
      depth[h] = grid.depth(c, h);
      if (!(depth[h] > 0.0)) throw DryColumn("non-positive water depth in column " + std::to_string(c));
    }
    // Each layer takes its thickness fraction Jz/H of the forcing, so the
    // vertical sum of the loads is exactly M_h f2d.
    for (int l = 0; l < grid.layers(c); ++l) {
      const int pr = grid.prism_offset(c) + l;
      const PrismGeom geo = prism_geom(grid, pr);
      double y[2][6] = {};
      for (const auto& tp : ref::triangle_rule()) {
        double hq = 0.0;
        Vec2 fq{};
        for (int h = 0; h < 3; ++h) {
          const double ph = ref::phi_h(h, tp.xi, tp.eta);
          hq += ph * depth[h];
          fq = fq + ph * f2d[3 * c + h];
        }
        const double share = tp.weight * geo.j2d * geo.jz_at(tp.xi, tp.eta) / hq;
        for (int zq = 0; zq < ref::kLinePoints; ++zq) {
          for (int i = 0; i < 6; ++i) {
            const double w = share * ref::kLineWeight[zq] * ref::phi(i, tp.xi, tp.eta, ref::kLineZeta[zq]);
            y[0][i] += w * fq.x;
            y[1][i] += w * fq.y;
          }
        }
      }
      for (int f = 0; f < 2; ++f) {
        for (int i = 0; i < 6; ++i) out.at(f, i, pr) += y[f][i];
      }
    }
  }
}

void advance_vertical(const ColumnGrid& before, const ColumnGrid& eval, const ColumnGrid& motion,
                      const Field& wtilde, const VerticalCoefficients& coeffs, double h, bool implicit,
                      const Field& x0, const Field& xe, const Field& residual, Field& x1,
                      std::span<const int> cols) {
  const int nf = x0.components();
  BandedColumn<double> a;
  Field rhs(nf, x0.layer_counts());
  Field ax;
  if (!implicit) ax = Field(nf, x0.layer_counts());
  for (int c : cols) {
    const int off = eval.prism_offset(c);
    const int nl = eval.layers(c);
    // rhs = M0 x0 + h R (+ h A xe when explicit).
    for (int l = 0; l < nl; ++l) {
      const PrismGeom g0 = prism_geom(before, off + l);
      for (int f = 0; f < nf; ++f) {
        double x[6], y[6];
        for (int i = 0; i < 6; ++i) {
          x[i] = x0.at(f, i, off + l);
          y[i] = h * residual.at(f, i, off + l);
        }
        prism_mass_apply(g0, x, y);
        for (int i = 0; i < 6; ++i) rhs.at(f, i, off + l) = y[i];
      }
    }
    assemble_vertical(eval, motion, wtilde, coeffs, c, a);
    if (!implicit) {
      add_banded_product(a, xe, c, ax);
      for (int l = 0; l < nl; ++l) {
        const PrismGeom g1 = prism_geom(motion, off + l);
        for (int f = 0; f < nf; ++f) {
          double y[6];
          for (int i = 0; i < 6; ++i) y[i] = rhs.at(f, i, off + l) + h * ax.at(f, i, off + l);
          for (int i = 0; i < 6; ++i) ax.at(f, i, off + l) = 0.0;
          prism_mass_solve(g1, y);
          for (int i = 0; i < 6; ++i) x1.at(f, i, off + l) = y[i];
        }
      }
      continue;
    }
    for (double& v : a.data) v *= -h;
    for (int l = 0; l < nl; ++l) {
      const auto m1 = prism_mass(prism_geom(motion, off + l));
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) a.d(l, i, j) += m1[i * 6 + j];
      }
    }
    // The factorization overwrites the diagonal blocks, so components are
    // solved two at a time from a fresh copy.
    for (int f0 = 0; f0 < nf; f0 += 2) {
      const int nc = std::min(2, nf - f0);
      BandedColumn<double> work = a;
      solve_banded_column<double>(
          work, nl, [&](int l, int k, int f) -> double& { return rhs.at(f0 + f, k, off + l); }, nc);
      for (int l = 0; l < nl; ++l) {
        for (int f = f0; f < f0 + nc; ++f) {
          for (int i = 0; i < 6; ++i) x1.at(f, i, off + l) = rhs.at(f, i, off + l);
        }
      }
    }
  }
}

}  // namespace prismdg
