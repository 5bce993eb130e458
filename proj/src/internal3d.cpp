#include "prismdg/internal3d.hpp"

#include <cmath>

#include "prismdg/errors.hpp"
#include "prismdg/external2d.hpp"
#include "prismdg/reference.hpp"

namespace prismdg {

namespace {

using ref::kEdgeRule;
using ref::kLineWeight;
using ref::kLineZeta;

// Integral of phi_a phi_b phi_c over the parent triangle.
double triple(int a, int b, int c) {
  if (a == b && b == c) return 1.0 / 20.0;
  if (a == b || b == c || a == c) return 1.0 / 60.0;
  return 1.0 / 120.0;
}

constexpr double kMz[2][2] = {{2.0 / 3.0, 1.0 / 3.0}, {1.0 / 3.0, 2.0 / 3.0}};

// 3x3 P1 mass matrix weighted by the nodal Jz.
std::array<double, 9> mass_jz(const PrismGeom& g) {
  std::array<double, 9> m{};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += g.jz[k] * triple(a, b, k);
      m[a * 3 + b] = g.j2d * s;
    }
  }
  return m;
}

std::array<double, 9> invert3(const std::array<double, 9>& m) {
  const double c00 = m[4] * m[8] - m[5] * m[7];
  const double c01 = m[5] * m[6] - m[3] * m[8];
  const double c02 = m[3] * m[7] - m[4] * m[6];
  const double det = m[0] * c00 + m[1] * c01 + m[2] * c02;
  if (!(std::abs(det) > 0.0)) throw SingularMass("prism mass matrix is singular");
  const double s = 1.0 / det;
  return {c00 * s,
          (m[2] * m[7] - m[1] * m[8]) * s,
          (m[1] * m[5] - m[2] * m[4]) * s,
          c01 * s,
          (m[0] * m[8] - m[2] * m[6]) * s,
          (m[2] * m[3] - m[0] * m[5]) * s,
          c02 * s,
          (m[1] * m[6] - m[0] * m[7]) * s,
          (m[0] * m[4] - m[1] * m[3]) * s};
}

// Value on a lateral face: the edge runs from local vertex `edge` to
// `edge + 1` with barycentric weights (l0, l1). Both sides of an edge call
// this with their own (edge, weights), so the shared expression is
// evaluated identically from either element.
double edge_value(const Field& x, int f, int prism, int edge, double l0, double l1, double zeta) {
  const int a = edge;
  const int b = (edge + 1) % 3;
  double v = 0.0;
  for (int lv = 0; lv < 2; ++lv) {
    v += ref::phi_z(lv, zeta) * (l0 * x.at(f, lv * 3 + a, prism) + l1 * x.at(f, lv * 3 + b, prism));
  }
  return v;
}

double edge_nodal(const std::array<double, 3>& v, int edge, double l0, double l1) {
  return l0 * v[edge] + l1 * v[(edge + 1) % 3];
}

// Value of a horizontal face: nodes level lv (0 top, 1 bottom) of a prism.
double face_value(const Field& x, int f, int prism, int lv, double xi, double eta) {
  double v = 0.0;
  for (int h = 0; h < 3; ++h) v += ref::phi_h(h, xi, eta) * x.at(f, lv * 3 + h, prism);
  return v;
}

std::vector<int> columns_or_all(std::span<const int> cols, int n, std::vector<int>& storage) {
  if (!cols.empty()) return {cols.begin(), cols.end()};
  storage.resize(n);
  for (int i = 0; i < n; ++i) storage[i] = i;
  return storage;
}

void check_depth(const PrismGeom& g) {
  for (int h = 0; h < 3; ++h) {
    if (!(g.depth[h] > 0.0)) throw DryColumn("non-positive water depth in column " + std::to_string(g.col));
  }
}

}  // namespace

double PrismGeom::jz_at(double xi, double eta) const {
  return ref::phi_h(0, xi, eta) * jz[0] + ref::phi_h(1, xi, eta) * jz[1] + ref::phi_h(2, xi, eta) * jz[2];
}

Vec2 PrismGeom::slope(double zeta) const {
  return ref::phi_z(0, zeta) * top_slope + ref::phi_z(1, zeta) * bottom_slope;
}

Vec3 PrismGeom::basis_gradient(int i, double xi, double eta, double zeta) const {
  const int h = i % 3;
  const int v = i / 3;
  const double jzv = jz_at(xi, eta);
  const Vec2 s = slope(zeta);
  const double pz = ref::phi_z(v, zeta);
  const double dz = ref::phi_h(h, xi, eta) * ref::dphi_z(v) / jzv;
  return {pz * grad[h].x - dz * s.x, pz * grad[h].y - dz * s.y, dz};
}

Vec2 PrismGeom::layer_gradient(int i, double zeta) const { return ref::phi_z(i / 3, zeta) * grad[i % 3]; }

PrismGeom prism_geom(const ColumnGrid& grid, int prism) {
  PrismGeom g;
  g.prism = prism;
  g.col = grid.column_of(prism);
  g.layer = grid.layer_of(prism);
  g.j2d = grid.j2d(prism);
  for (int h = 0; h < 3; ++h) {
    g.jz[h] = grid.jz(prism, h);
    g.depth[h] = grid.depth(g.col, h);
  }
  g.grad = grid.mesh().basis_gradients(g.col);
  g.top_slope = grid.top_slope(prism);
  g.bottom_slope = grid.bottom_slope(prism);
  return g;
}

std::array<double, 36> prism_mass(const PrismGeom& g) {
  const auto mh = mass_jz(g);
  std::array<double, 36> m{};
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) m[i * 6 + j] = kMz[i / 3][j / 3] * mh[(i % 3) * 3 + j % 3];
  }
  return m;
}

void prism_mass_apply(const PrismGeom& g, const double* x, double* y) {
  const auto m = prism_mass(g);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) y[i] += m[i * 6 + j] * x[j];
  }
}

void prism_mass_solve(const PrismGeom& g, double* x) {
  // M = Mz (x) Mh,Jz, so M^{-1} = Mz^{-1} (x) Mh,Jz^{-1} with Mz^{-1} = [[2,-1],[-1,2]].
  const auto inv = invert3(mass_jz(g));
  double t[6];
  for (int h = 0; h < 3; ++h) {
    t[h] = 2.0 * x[h] - x[3 + h];
    t[3 + h] = 2.0 * x[3 + h] - x[h];
  }
  for (int v = 0; v < 2; ++v) {
    for (int a = 0; a < 3; ++a) {
      double s = 0.0;
      for (int b = 0; b < 3; ++b) s += inv[a * 3 + b] * t[v * 3 + b];
      x[v * 3 + a] = s;
    }
  }
}

int lateral_neighbor(const ColumnGrid& grid, int prism, int edge) {
  const int c = grid.column_of(prism);
  const int nb = grid.mesh().neighbor(c, edge);
  if (nb < 0) return -1;
  if (grid.layers(nb) != grid.layers(c)) {
    throw NonConformingLayers("columns " + std::to_string(c) + " and " + std::to_string(nb) +
                              " have different layer counts");
  }
  return grid.prism_offset(nb) + grid.layer_of(prism);
}

double eval(const Field& x, int f, int prism, double xi, double eta, double zeta) {
  double v = 0.0;
  for (int i = 0; i < 6; ++i) v += x.at(f, i, prism) * ref::phi(i, xi, eta, zeta);
  return v;
}

double lateral_transport(const ColumnGrid& grid, const Field& transport, std::span<const double> stab,
                         int prism, int edge, int gp, double zeta) {
  const Mesh2D& mesh = grid.mesh();
  const int c = grid.column_of(prism);
  const ref::EdgePoint& p = kEdgeRule[gp];
  const Vec2 n = mesh.edge_normal(c, edge);
  const Vec2 qi{edge_value(transport, 0, prism, edge, p.lam0, p.lam1, zeta),
                edge_value(transport, 1, prism, edge, p.lam0, p.lam1, zeta)};
  const std::array<double, 3> jzi{grid.jz(prism, 0), grid.jz(prism, 1), grid.jz(prism, 2)};
  const std::array<double, 3> hi{grid.depth(c, 0), grid.depth(c, 1), grid.depth(c, 2)};
  const double ri = edge_nodal(jzi, edge, p.lam0, p.lam1) / edge_nodal(hi, edge, p.lam0, p.lam1);
  Vec2 qe;
  double re = ri;
  const int nb = lateral_neighbor(grid, prism, edge);
  if (nb >= 0) {
    const int nc = grid.column_of(nb);
    const int nk = mesh.neighbor_local_edge(c, edge);
    qe = Vec2{edge_value(transport, 0, nb, nk, p.lam1, p.lam0, zeta),
              edge_value(transport, 1, nb, nk, p.lam1, p.lam0, zeta)};
    const std::array<double, 3> jze{grid.jz(nb, 0), grid.jz(nb, 1), grid.jz(nb, 2)};
    const std::array<double, 3> he{grid.depth(nc, 0), grid.depth(nc, 1), grid.depth(nc, 2)};
    re = edge_nodal(jze, nk, p.lam1, p.lam0) / edge_nodal(he, nk, p.lam1, p.lam0);
  } else if (mesh.boundary_tag(c, edge) == BoundaryTag::Open) {
    qe = qi;
  } else {
    qe = qi - (2.0 * dot(n, qi)) * n;
  }
  const Vec2 qm{iface_mean(qi.x, qe.x), iface_mean(qi.y, qe.y)};
  return dot(n, qm) + iface_mean(ri, re) * stab[static_cast<std::size_t>(kEdgeSamples) * c + edge * 2 + gp];
}

void compute_r_rhs(const ColumnGrid& grid, const PhysParams& p, const Field& density, Field& rhs,
                   std::span<const int> cols) {
  const Mesh2D& mesh = grid.mesh();
  const double g = p.g;
  std::vector<int> all;
  for (int c : columns_or_all(cols, grid.num_columns(), all)) {
    const int nl = grid.layers(c);
    const Vec2 grad_eta = [&] {
      const auto gr = mesh.basis_gradients(c);
      return (grid.eta(c, 1) - grid.eta(c, 0)) * gr[1] + (grid.eta(c, 2) - grid.eta(c, 0)) * gr[2];
    }();
    for (int l = 0; l < nl; ++l) {
      const int pr = grid.prism_offset(c) + l;
      const PrismGeom geo = prism_geom(grid, pr);
      check_depth(geo);
      double r[2][6] = {};
      // Volume: -g phi grad_h(rho), gradient from nodal differences.
      for (const auto& tp : ref::triangle_rule()) {
        for (int zq = 0; zq < 2; ++zq) {
          const double zeta = kLineZeta[zq];
          const double wgt = tp.weight * kLineWeight[zq] * geo.j2d * geo.jz_at(tp.xi, tp.eta);
          Vec2 grho{};
          const double rho0 = density.at(0, 0, pr);
          for (int j = 1; j < 6; ++j) {
            const Vec3 gj = geo.basis_gradient(j, tp.xi, tp.eta, zeta);
            const double d = density.at(0, j, pr) - rho0;
            grho = grho + d * Vec2{gj.x, gj.y};
          }
          for (int i = 0; i < 6; ++i) {
            const double ph = ref::phi(i, tp.xi, tp.eta, zeta);
            r[0][i] -= g * ph * grho.x * wgt;
            r[1][i] -= g * ph * grho.y * wgt;
          }
        }
      }
      // Top face: upwind from above, or the surface value.
      for (const auto& tp : ref::triangle_rule()) {
        const double rho_in = face_value(density, 0, pr, 0, tp.xi, tp.eta);
        Vec2 term;
        if (l > 0) {
          const double d = iface_diff(rho_in, face_value(density, 0, pr - 1, 1, tp.xi, tp.eta));
          term = (2.0 * g * d) * (Vec2{} - geo.top_slope);
        } else {
          term = (-g * rho_in) * grad_eta;
        }
        for (int h = 0; h < 3; ++h) {
          const double wgt = tp.weight * geo.j2d * ref::phi_h(h, tp.xi, tp.eta);
          r[0][h] += wgt * term.x;
          r[1][h] += wgt * term.y;
        }
      }
      // Lateral faces: mean(Jz) with the jump of rho.
      for (int k = 0; k < 3; ++k) {
        const int nb = lateral_neighbor(grid, pr, k);
        const int nk = nb >= 0 ? mesh.neighbor_local_edge(c, k) : -1;
        const Vec2 n = mesh.edge_normal(c, k);
        const double len = mesh.edge_length(c, k);
        for (int gp = 0; gp < 2; ++gp) {
          const ref::EdgePoint& ep = kEdgeRule[gp];
          const double jzi = edge_nodal(geo.jz, k, ep.lam0, ep.lam1);
          double jze = jzi;
          if (nb >= 0) {
            const std::array<double, 3> jzn{grid.jz(nb, 0), grid.jz(nb, 1), grid.jz(nb, 2)};
            jze = edge_nodal(jzn, nk, ep.lam1, ep.lam0);
          }
          for (int zq = 0; zq < 2; ++zq) {
            const double zeta = kLineZeta[zq];
            const double ri = edge_value(density, 0, pr, k, ep.lam0, ep.lam1, zeta);
            const double re = nb >= 0 ? edge_value(density, 0, nb, nk, ep.lam1, ep.lam0, zeta) : ri;
            const double s = g * iface_diff(ri, re) * iface_mean(jzi, jze) * len * ep.weight * kLineWeight[zq];
            const auto phh = ref::phi_h_edge(k, ep.lam0, ep.lam1);
            for (int i = 0; i < 6; ++i) {
              const double ph = phh[i % 3] * ref::phi_z(i / 3, zeta);
              r[0][i] += ph * s * n.x;
              r[1][i] += ph * s * n.y;
            }
          }
        }
      }
      for (int f = 0; f < 2; ++f) {
        for (int i = 0; i < 6; ++i) rhs.at(f, i, pr) = r[f][i];
      }
    }
  }
}

namespace {

// Lateral stabilized-flux term shared by the w and w-tilde equations.
void add_lateral_continuity(const ColumnGrid& grid, const Field& q, std::span<const double> stab, int pr,
                            double* r) {
  const Mesh2D& mesh = grid.mesh();
  const int c = grid.column_of(pr);
  for (int k = 0; k < 3; ++k) {
    const double len = mesh.edge_length(c, k);
    for (int gp = 0; gp < 2; ++gp) {
      const ref::EdgePoint& ep = kEdgeRule[gp];
      const auto phh = ref::phi_h_edge(k, ep.lam0, ep.lam1);
      for (int zq = 0; zq < 2; ++zq) {
        const double zeta = kLineZeta[zq];
        const double flux = lateral_transport(grid, q, stab, pr, k, gp, zeta);
        const double s = flux * len * ep.weight * kLineWeight[zq];
        for (int i = 0; i < 6; ++i) r[i] -= phh[i % 3] * ref::phi_z(i / 3, zeta) * s;
      }
    }
  }
}

}  // namespace

void compute_w_rhs(const ColumnGrid& grid, const Field& q, std::span<const double> stab, Field& rhs,
                   std::span<const int> cols) {
  std::vector<int> all;
  for (int c : columns_or_all(cols, grid.num_columns(), all)) {
    const int nl = grid.layers(c);
    for (int l = 0; l < nl; ++l) {
      const int pr = grid.prism_offset(c) + l;
      const PrismGeom geo = prism_geom(grid, pr);
      check_depth(geo);
      double r[6] = {};
      for (const auto& tp : ref::triangle_rule()) {
        for (int zq = 0; zq < 2; ++zq) {
          const double zeta = kLineZeta[zq];
          const Vec2 qv{eval(q, 0, pr, tp.xi, tp.eta, zeta), eval(q, 1, pr, tp.xi, tp.eta, zeta)};
          const double wgt = tp.weight * kLineWeight[zq] * geo.j2d;
          for (int i = 0; i < 6; ++i) {
            const Vec3 gi = geo.basis_gradient(i, tp.xi, tp.eta, zeta);
            r[i] += wgt * (qv.x * gi.x + qv.y * gi.y);
          }
        }
      }
      // Horizontal faces: -n_h / |n_z| . mean(q / Jz). The bed face is closed
      // by impermeability; the surface uses interior values.
      for (const auto& tp : ref::triangle_rule()) {
        const double jz_in = geo.jz_at(tp.xi, tp.eta);
        const Vec2 top_in{face_value(q, 0, pr, 0, tp.xi, tp.eta) / jz_in,
                          face_value(q, 1, pr, 0, tp.xi, tp.eta) / jz_in};
        Vec2 top_ex = top_in;
        if (l > 0) {
          const double jz_ex = prism_geom(grid, pr - 1).jz_at(tp.xi, tp.eta);
          top_ex = Vec2{face_value(q, 0, pr - 1, 1, tp.xi, tp.eta) / jz_ex,
                        face_value(q, 1, pr - 1, 1, tp.xi, tp.eta) / jz_ex};
        }
        const double top = dot(geo.top_slope, Vec2{iface_mean(top_in.x, top_ex.x), iface_mean(top_in.y, top_ex.y)});
        double bot = 0.0;
        if (l + 1 < nl) {
          const Vec2 bot_in{face_value(q, 0, pr, 1, tp.xi, tp.eta) / jz_in,
                            face_value(q, 1, pr, 1, tp.xi, tp.eta) / jz_in};
          const double jz_ex = prism_geom(grid, pr + 1).jz_at(tp.xi, tp.eta);
          const Vec2 bot_ex{face_value(q, 0, pr + 1, 0, tp.xi, tp.eta) / jz_ex,
                            face_value(q, 1, pr + 1, 0, tp.xi, tp.eta) / jz_ex};
          bot = -dot(geo.bottom_slope, Vec2{iface_mean(bot_in.x, bot_ex.x), iface_mean(bot_in.y, bot_ex.y)});
        }
        for (int h = 0; h < 3; ++h) {
          const double wgt = tp.weight * geo.j2d * ref::phi_h(h, tp.xi, tp.eta);
          r[h] += wgt * top;
          r[3 + h] += wgt * bot;
        }
      }
      add_lateral_continuity(grid, q, stab, pr, r);
      for (int i = 0; i < 6; ++i) rhs.at(0, i, pr) = r[i];
    }
  }
}

void compute_wtilde_rhs(const ColumnGrid& grid, const Field& q, std::span<const double> stab, Field& rhs,
                        std::span<const int> cols) {
  std::vector<int> all;
  for (int c : columns_or_all(cols, grid.num_columns(), all)) {
    const int nl = grid.layers(c);
    for (int l = 0; l < nl; ++l) {
      const int pr = grid.prism_offset(c) + l;
      const PrismGeom geo = prism_geom(grid, pr);
      check_depth(geo);
      double r[6] = {};
      // Integral of J2D q . phi_z grad(phi_h), exact for P1 q.
      Vec2 level_sum[2];
      for (int v = 0; v < 2; ++v) {
        for (int h = 0; h < 3; ++h) {
          level_sum[v] = level_sum[v] + Vec2{q.at(0, v * 3 + h, pr), q.at(1, v * 3 + h, pr)};
        }
      }
      for (int i = 0; i < 6; ++i) {
        const int v = i / 3;
        const Vec2 qv = kMz[v][0] * level_sum[0] + kMz[v][1] * level_sum[1];
        r[i] = geo.j2d / 6.0 * dot(geo.grad[i % 3], qv);
      }
      add_lateral_continuity(grid, q, stab, pr, r);
      for (int i = 0; i < 6; ++i) rhs.at(0, i, pr) = r[i];
    }
  }
}

void solve_columns(ColumnSystemKind kind, const ColumnGrid& grid, Field& field, std::span<const int> cols,
                   int cell_width) {
  if (kind != ColumnSystemKind::Dvu && kind != ColumnSystemKind::Dvd) {
    throw Error("solve_columns handles the fixed-pattern systems only");
  }
  std::vector<int> all;
  const std::vector<int> list = columns_or_all(cols, grid.num_columns(), all);
  if (cell_width <= 0) {
    for (int c : list) {
      const int off = grid.prism_offset(c);
      for (int f = 0; f < field.components(); ++f) {
        auto at = [&](int l, int k) -> double& { return field.at(f, k, off + l); };
        if (kind == ColumnSystemKind::Dvu) {
          solve_r_column<double>(at, grid.layers(c), grid.mesh().jacobian(c));
        } else {
          solve_w_column<double>(at, grid.layers(c), grid.mesh().jacobian(c));
        }
      }
    }
    return;
  }
  for (std::size_t start = 0; start < list.size(); start += cell_width) {
    const std::size_t n = std::min<std::size_t>(cell_width, list.size() - start);
    const std::span<const int> chunk(list.data() + start, n);
    CellBlock<double> cell = gather_cell<double>(field, chunk, cell_width);
    std::vector<double> j2d(n);
    for (std::size_t j = 0; j < n; ++j) j2d[j] = grid.mesh().jacobian(chunk[j]);
    if (kind == ColumnSystemKind::Dvu) {
      solve_r_cell(cell, j2d);
    } else {
      solve_w_cell(cell, j2d);
    }
    cell_to_soa(std::vector<CellBlock<double>>{std::move(cell)}, field);
  }
}

void project_transport(const ColumnGrid& grid, const Field& u, Field& q, std::span<const int> cols) {
  std::vector<int> all;
  for (int c : columns_or_all(cols, grid.num_columns(), all)) {
    for (int l = 0; l < grid.layers(c); ++l) {
      const int pr = grid.prism_offset(c) + l;
      const PrismGeom geo = prism_geom(grid, pr);
      const auto m = mass_jz(geo);
      for (int f = 0; f < u.components(); ++f) {
        for (int v = 0; v < 2; ++v) {
          double y[3];
          for (int a = 0; a < 3; ++a) {
            y[a] = 0.0;
            for (int b = 0; b < 3; ++b) y[a] += m[a * 3 + b] * u.at(f, v * 3 + b, pr);
          }
          detail::apply_inverse_mass(geo.j2d, y);
          for (int a = 0; a < 3; ++a) q.at(f, v * 3 + a, pr) = y[a];
        }
      }
    }
  }
}

void build_consistent_transport(const ColumnGrid& grid, const Field& q, std::span<const Vec2> mean_transport,
                                Field& qbar, std::span<const int> cols) {
  std::vector<int> all;
  for (int c : columns_or_all(cols, grid.num_columns(), all)) {
    const int off = grid.prism_offset(c);
    const int nl = grid.layers(c);
    for (int h = 0; h < 3; ++h) {
      const double depth = grid.depth(c, h);
      if (!(depth > 0.0)) throw DryColumn("non-positive water depth in column " + std::to_string(c));
      Vec2 sum{};
      for (int l = 0; l < nl; ++l) {
        for (int v = 0; v < 2; ++v) sum = sum + Vec2{q.at(0, v * 3 + h, off + l), q.at(1, v * 3 + h, off + l)};
      }
      const Vec2 corr = mean_transport[3 * c + h] - sum;
      for (int l = 0; l < nl; ++l) {
        const double w = grid.jz(off + l, h) / depth;
        for (int v = 0; v < 2; ++v) {
          const int i = v * 3 + h;
          qbar.at(0, i, off + l) = q.at(0, i, off + l) + w * corr.x;
          qbar.at(1, i, off + l) = q.at(1, i, off + l) + w * corr.y;
        }
      }
    }
  }
}

std::vector<Vec2> vertical_sum(const Field& x, std::span<const int> cols, int num_columns) {
  std::vector<Vec2> out(static_cast<std::size_t>(num_columns) * 3);
  for (int c : cols) {
    for (int l = 0; l < x.layers(c); ++l) {
      const int pr = x.offset(c) + l;
      for (int i = 0; i < 6; ++i) out[3 * c + i % 3] = out[3 * c + i % 3] + Vec2{x.at(0, i, pr), x.at(1, i, pr)};
    }
  }
  return out;
}

void add_horizontal_advection(const ColumnGrid& grid, const Field& field, const Field& transport,
                              std::span<const double> stab, Field& out, std::span<const int> cols) {
  const Mesh2D& mesh = grid.mesh();
  const int nf = field.components();
  std::vector<int> all;
  for (int c : columns_or_all(cols, grid.num_columns(), all)) {
    for (int l = 0; l < grid.layers(c); ++l) {
      const int pr = grid.prism_offset(c) + l;
      const PrismGeom geo = prism_geom(grid, pr);
      check_depth(geo);
      for (const auto& tp : ref::triangle_rule()) {
        for (int zq = 0; zq < 2; ++zq) {
          const double zeta = kLineZeta[zq];
          const Vec2 qv{eval(transport, 0, pr, tp.xi, tp.eta, zeta), eval(transport, 1, pr, tp.xi, tp.eta, zeta)};
          const double wgt = tp.weight * kLineWeight[zq] * geo.j2d;
          for (int f = 0; f < nf; ++f) {
            const double xv = eval(field, f, pr, tp.xi, tp.eta, zeta);
            for (int i = 0; i < 6; ++i) out.at(f, i, pr) += wgt * xv * dot(qv, geo.layer_gradient(i, zeta));
          }
        }
      }
      for (int k = 0; k < 3; ++k) {
        const int nb = lateral_neighbor(grid, pr, k);
        const int nk = nb >= 0 ? mesh.neighbor_local_edge(c, k) : -1;
        const double len = mesh.edge_length(c, k);
        for (int gp = 0; gp < 2; ++gp) {
          const ref::EdgePoint& ep = kEdgeRule[gp];
          const auto phh = ref::phi_h_edge(k, ep.lam0, ep.lam1);
          for (int zq = 0; zq < 2; ++zq) {
            const double zeta = kLineZeta[zq];
            const double flux = lateral_transport(grid, transport, stab, pr, k, gp, zeta);
            const double s = flux * len * ep.weight * kLineWeight[zq];
            for (int f = 0; f < nf; ++f) {
              double up = edge_value(field, f, pr, k, ep.lam0, ep.lam1, zeta);
              if (flux < 0.0 && nb >= 0) up = edge_value(field, f, nb, nk, ep.lam1, ep.lam0, zeta);
              for (int i = 0; i < 6; ++i) out.at(f, i, pr) -= phh[i % 3] * ref::phi_z(i / 3, zeta) * up * s;
            }
          }
        }
      }
    }
  }
}

void add_horizontal_diffusion(const ColumnGrid& grid, double kh, const PenaltyParams& penalty, const Field& field,
                              Field& out, std::span<const int> cols) {
  if (kh == 0.0) return;
  const Mesh2D& mesh = grid.mesh();
  const int nf = field.components();
  std::vector<int> all;
  auto gradient = [&](const PrismGeom& g, int f, double xi, double eta, double zeta) {
    Vec3 s{};
    const double x0 = field.at(f, 0, g.prism);
    for (int j = 1; j < 6; ++j) s = s + (field.at(f, j, g.prism) - x0) * g.basis_gradient(j, xi, eta, zeta);
    return s;
  };
  // Layer gradient of a face level (lv 0 top, 1 bottom).
  auto face_gradient = [&](const PrismGeom& g, int f, int lv) {
    Vec2 s{};
    const double x0 = field.at(f, lv * 3, g.prism);
    for (int h = 1; h < 3; ++h) s = s + (field.at(f, lv * 3 + h, g.prism) - x0) * g.grad[h];
    return s;
  };
  for (int c : columns_or_all(cols, grid.num_columns(), all)) {
    const int nl = grid.layers(c);
    for (int l = 0; l < nl; ++l) {
      const int pr = grid.prism_offset(c) + l;
      const PrismGeom geo = prism_geom(grid, pr);
      // Volume with the explicit tensor diag(kh, kh, -kh |slope|^2).
      for (const auto& tp : ref::triangle_rule()) {
        for (int zq = 0; zq < 2; ++zq) {
          const double zeta = kLineZeta[zq];
          const Vec2 s = geo.slope(zeta);
          const double wgt = tp.weight * kLineWeight[zq] * geo.j2d * geo.jz_at(tp.xi, tp.eta);
          for (int f = 0; f < nf; ++f) {
            const Vec3 gx = gradient(geo, f, tp.xi, tp.eta, zeta);
            const Vec3 flux{kh * gx.x, kh * gx.y, -kh * dot(s, s) * gx.z};
            for (int i = 0; i < 6; ++i) {
              out.at(f, i, pr) -= wgt * dot(geo.basis_gradient(i, tp.xi, tp.eta, zeta), flux);
            }
          }
        }
      }
      // Lateral interior faces: mean flux and interior penalty.
      for (int k = 0; k < 3; ++k) {
        const int nb = lateral_neighbor(grid, pr, k);
        if (nb < 0) continue;
        const int nk = mesh.neighbor_local_edge(c, k);
        const PrismGeom gn = prism_geom(grid, nb);
        const Vec2 n = mesh.edge_normal(c, k);
        const double len = mesh.edge_length(c, k);
        const double sigma = penalty_sigma(penalty, mesh.area(c) / len, mesh.area(gn.col) / len);
        for (int gp = 0; gp < 2; ++gp) {
          const ref::EdgePoint& ep = kEdgeRule[gp];
          const Vec2 pi = ref::edge_point(k, ep.lam0, ep.lam1);
          const Vec2 pe = ref::edge_point(nk, ep.lam1, ep.lam0);
          const double jzi = edge_nodal(geo.jz, k, ep.lam0, ep.lam1);
          const double jze = edge_nodal(gn.jz, nk, ep.lam1, ep.lam0);
          const auto phh = ref::phi_h_edge(k, ep.lam0, ep.lam1);
          for (int zq = 0; zq < 2; ++zq) {
            const double zeta = kLineZeta[zq];
            const double wgt = ep.weight * kLineWeight[zq] * len;
            for (int f = 0; f < nf; ++f) {
              const Vec3 gi = gradient(geo, f, pi.x, pi.y, zeta);
              const Vec3 ge = gradient(gn, f, pe.x, pe.y, zeta);
              const double fi = kh * jzi * (n.x * gi.x + n.y * gi.y);
              const double fe = kh * jze * (n.x * ge.x + n.y * ge.y);
              const double xi = edge_value(field, f, pr, k, ep.lam0, ep.lam1, zeta);
              const double xe = edge_value(field, f, nb, nk, ep.lam1, ep.lam0, zeta);
              const double term = iface_mean(fi, fe) - sigma * kh * iface_mean(jzi, jze) * iface_diff(xi, xe);
              for (int i = 0; i < 6; ++i) out.at(f, i, pr) += wgt * phh[i % 3] * ref::phi_z(i / 3, zeta) * term;
            }
          }
        }
      }
      // Horizontal interior faces: Jtb n . k_e grad = -+ J2D kh slope . layer gradient.
      for (int f = 0; f < nf; ++f) {
        if (l > 0) {
          const PrismGeom ga = prism_geom(grid, pr - 1);
          const Vec2 gi = face_gradient(geo, f, 0);
          const Vec2 ge = face_gradient(ga, f, 1);
          const double flux = -geo.j2d * kh * dot(geo.top_slope, Vec2{iface_mean(gi.x, ge.x), iface_mean(gi.y, ge.y)});
          for (int h = 0; h < 3; ++h) out.at(f, h, pr) += flux / 6.0;
        }
        if (l + 1 < nl) {
          const PrismGeom gb = prism_geom(grid, pr + 1);
          const Vec2 gi = face_gradient(geo, f, 1);
          const Vec2 ge = face_gradient(gb, f, 0);
          const double flux = geo.j2d * kh * dot(geo.bottom_slope, Vec2{iface_mean(gi.x, ge.x), iface_mean(gi.y, ge.y)});
          for (int h = 0; h < 3; ++h) out.at(f, 3 + h, pr) += flux / 6.0;
        }
      }
    }
  }
}

void assemble_vertical(const ColumnGrid& grid, const ColumnGrid& motion, const Field& wtilde,
                       const VerticalCoefficients& cf, int col, BandedColumn<double>& a) {
  const int nl = grid.layers(col);
  a = BandedColumn<double>(nl);
  const int off = grid.prism_offset(col);
  const bool viscous = cf.kh != 0.0 || cf.kv != 0.0;
  for (int l = 0; l < nl; ++l) {
    const int pr = off + l;
    const PrismGeom geo = prism_geom(grid, pr);
    const double j2d = geo.j2d;
    if (cf.advection) {
      // Relative vertical velocity at the nodes.
      double rel[6];
      for (int h = 0; h < 3; ++h) {
        rel[h] = wtilde.at(0, h, pr) - motion.wm(col, l, h);
        rel[3 + h] = wtilde.at(0, 3 + h, pr) - motion.wm(col, l + 1, h);
      }
      for (const auto& tp : ref::triangle_rule()) {
        for (int zq = 0; zq < 2; ++zq) {
          const double zeta = kLineZeta[zq];
          double vel = 0.0;
          for (int j = 0; j < 6; ++j) vel += rel[j] * ref::phi(j, tp.xi, tp.eta, zeta);
          const double wgt = tp.weight * kLineWeight[zq] * j2d * vel;
          for (int i = 0; i < 6; ++i) {
            const double di = ref::phi_h(i % 3, tp.xi, tp.eta) * ref::dphi_z(i / 3);
            for (int j = 0; j < 6; ++j) a.d(l, i, j) += wgt * di * ref::phi(j, tp.xi, tp.eta, zeta);
          }
        }
      }
      for (const auto& tp : ref::triangle_rule()) {
        double ph[3];
        for (int h = 0; h < 3; ++h) ph[h] = ref::phi_h(h, tp.xi, tp.eta);
        // Top face, velocity from the layer below the interface (this one).
        const double vt = ph[0] * rel[0] + ph[1] * rel[1] + ph[2] * rel[2];
        for (int hi = 0; hi < 3; ++hi) {
          for (int hj = 0; hj < 3; ++hj) {
            const double e = tp.weight * j2d * ph[hi] * vt * ph[hj];
            if (vt >= 0.0 || l == 0) {
              a.d(l, hi, hj) -= e;
            } else {
              a.u(l, hi, 3 + hj) -= e;
            }
          }
        }
        // Bottom face: velocity from the top of the layer below; zero at the bed.
        if (l + 1 < nl) {
          double vb = 0.0;
          for (int h = 0; h < 3; ++h) vb += ph[h] * (wtilde.at(0, h, pr + 1) - motion.wm(col, l + 1, h));
          for (int hi = 0; hi < 3; ++hi) {
            for (int hj = 0; hj < 3; ++hj) {
              const double e = tp.weight * j2d * ph[hi] * vb * ph[hj];
              if (vb >= 0.0) {
                a.lo(l, hi, hj) += e;
              } else {
                a.d(l, 3 + hi, 3 + hj) += e;
              }
            }
          }
        }
      }
    }
    if (!viscous) continue;
    // Volume: -(J2D / Jz) k_i dphi/dzeta dx/dzeta.
    for (const auto& tp : ref::triangle_rule()) {
      for (int zq = 0; zq < 2; ++zq) {
        const double zeta = kLineZeta[zq];
        const Vec2 s = geo.slope(zeta);
        const double ki = cf.kh * dot(s, s) + cf.kv;
        const double wgt = -tp.weight * kLineWeight[zq] * j2d / geo.jz_at(tp.xi, tp.eta) * ki;
        for (int i = 0; i < 6; ++i) {
          const double di = ref::phi_h(i % 3, tp.xi, tp.eta) * ref::dphi_z(i / 3);
          for (int j = 0; j < 6; ++j) {
            a.d(l, i, j) += wgt * di * ref::phi_h(j % 3, tp.xi, tp.eta) * ref::dphi_z(j / 3);
          }
        }
      }
    }
    // Interior horizontal faces: mean flux and penalty.
    for (int side = 0; side < 2; ++side) {
      const int other = side == 0 ? l - 1 : l + 1;
      if (other < 0 || other >= nl) continue;
      const PrismGeom go = prism_geom(grid, off + other);
      const Vec2 s = side == 0 ? geo.top_slope : geo.bottom_slope;
      const double ki = cf.kh * dot(s, s) + cf.kv;
      const double nz = 1.0 / std::sqrt(1.0 + dot(s, s));
      const double sigma = penalty_sigma(cf.penalty, geo.mean_height(), go.mean_height());
      const double sign = side == 0 ? 1.0 : -1.0;  // n_z Jtb / J2D
      const int row = side == 0 ? 0 : 3;          // rows on this face
      const int far = side == 0 ? 3 : 0;          // face nodes of the other prism
      auto ext = [&](int hi, int j) -> double& {
        return side == 0 ? a.u(l, hi, j) : a.lo(l, hi, j);
      };
      for (const auto& tp : ref::triangle_rule()) {
        double ph[3];
        for (int h = 0; h < 3; ++h) ph[h] = ref::phi_h(h, tp.xi, tp.eta);
        const double jz_in = geo.jz_at(tp.xi, tp.eta);
        const double jz_ex = go.jz_at(tp.xi, tp.eta);
        for (int hi = 0; hi < 3; ++hi) {
          // mean(k_i dx/dz): dx/dzeta = (x_top - x_bot) / 2 on each prism.
          const double m = sign * j2d * tp.weight * ph[hi] * ki * 0.5;
          const double pen = -sigma * ki * nz * j2d * tp.weight * ph[hi] * 0.5;
          for (int hj = 0; hj < 3; ++hj) {
            const double e_in = m * 0.5 * ph[hj] / jz_in;
            const double e_ex = m * 0.5 * ph[hj] / jz_ex;
            a.d(l, row + hi, hj) += e_in;
            a.d(l, row + hi, 3 + hj) -= e_in;
            ext(hi, hj) += e_ex;
            ext(hi, 3 + hj) -= e_ex;
            a.d(l, row + hi, row + hj) += pen * ph[hj];
            ext(hi, far + hj) -= pen * ph[hj];
          }
        }
      }
    }
  }
}

void add_banded_product(const BandedColumn<double>& a, const Field& x, int col, Field& out) {
  const int off = x.offset(col);
  const int nl = a.layers;
  for (int f = 0; f < x.components(); ++f) {
    for (int l = 0; l < nl; ++l) {
      for (int i = 0; i < 6; ++i) {
        double y = 0.0;
        for (int j = 0; j < 6; ++j) y += a.d(l, i, j) * x.at(f, j, off + l);
        if (i < 3 && l > 0) {
          for (int j = 0; j < 6; ++j) y += a.u(l, i, j) * x.at(f, j, off + l - 1);
        }
        if (i >= 3 && l + 1 < nl) {
          for (int j = 0; j < 6; ++j) y += a.lo(l, i - 3, j) * x.at(f, j, off + l + 1);
        }
        out.at(f, i, off + l) += y;
      }
    }
  }
}

}  // namespace prismdg
