#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "prismdg/errors.hpp"
#include "prismdg/layout.hpp"

namespace prismdg {

enum class ColumnSystemKind { Dvu, Dvd, BandedImplicit, Tridiagonal };

namespace detail {

// x <- M_h^{-1} x for M_h = (J2D/24) [[2,1,1],[1,2,1],[1,1,2]].
template <class Real>
inline void apply_inverse_mass(Real j2d, Real* x) {
  const Real s = Real(6) / j2d;
  const Real a = x[0], b = x[1], c = x[2];
  x[0] = s * (Real(3) * a - b - c);
  x[1] = s * (Real(3) * b - a - c);
  x[2] = s * (Real(3) * c - a - b);
}

template <class Real>
inline void check_mass(Real j2d) {
  if (!(j2d > Real(0))) throw SingularMass("column mass matrix is singular (J2D <= 0)");
}

}  // namespace detail

// Surface-anchored solve D_vu r = F on one column, in place. `at(l, k)`
// returns a reference to node k of layer l (layer 0 at the surface).
// The top-face value of each layer comes from the layer above; the surface
// value is assumed folded into F.
template <class Real, class Access>
void solve_r_column(Access&& at, int layers, Real j2d) {
  detail::check_mass(j2d);
  std::array<Real, 3> s{Real(0), Real(0), Real(0)};
  std::array<Real, 6> r;
  for (int l = 0; l < layers; ++l) {
    for (int k = 0; k < 6; ++k) r[k] = at(l, k);
    detail::apply_inverse_mass(j2d, r.data());
    detail::apply_inverse_mass(j2d, r.data() + 3);
    for (int i = 0; i < 3; ++i) {
      s[i] += r[i] + r[i + 3];
      r[i] = -s[i] + Real(2) * r[i + 3];
      r[i + 3] = -s[i];
    }
    for (int k = 0; k < 6; ++k) at(l, k) = r[k];
  }
}

// Bed-anchored solve D_vd w = F on one column, in place. Each layer's
// bottom-face value comes from the top of the layer below; zero at the bed.
// Per layer with a = M^{-1} F_top, c = M^{-1} F_bot and s the value below:
// w_top = s + a + c, w_bot = s + c - a.
template <class Real, class Access>
void solve_w_column(Access&& at, int layers, Real j2d) {
  detail::check_mass(j2d);
  std::array<Real, 3> s{Real(0), Real(0), Real(0)};
  std::array<Real, 6> w;
  for (int l = layers - 1; l >= 0; --l) {
    for (int k = 0; k < 6; ++k) w[k] = at(l, k);
    detail::apply_inverse_mass(j2d, w.data());
    detail::apply_inverse_mass(j2d, w.data() + 3);
    for (int i = 0; i < 3; ++i) {
      const Real a = w[i];
      const Real c = w[i + 3];
      w[i] = s[i] + a + c;
      w[i + 3] = s[i] + c - a;
      s[i] = w[i];
    }
    for (int k = 0; k < 6; ++k) at(l, k) = w[k];
  }
}

// Batched variants over a cell: every real column j, every component.
// Padding columns are left untouched (zero).
template <class Real>
void solve_r_cell(CellBlock<Real>& cell, const std::vector<Real>& j2d) {
  for (std::size_t j = 0; j < cell.columns.size(); ++j) {
    for (int f = 0; f < cell.components; ++f) {
      solve_r_column<Real>([&](int l, int k) -> Real& { return cell.at(l, k, f, static_cast<int>(j)); },
                           cell.layers[j], j2d[j]);
    }
  }
}

template <class Real>
void solve_w_cell(CellBlock<Real>& cell, const std::vector<Real>& j2d) {
  for (std::size_t j = 0; j < cell.columns.size(); ++j) {
    for (int f = 0; f < cell.components; ++f) {
      solve_w_column<Real>([&](int l, int k) -> Real& { return cell.at(l, k, f, static_cast<int>(j)); },
                           cell.layers[j], j2d[j]);
    }
  }
}

// Block-banded column matrix. Layer l stores
//   D  (6x6): its own nodes,
//   U  (3x6): top nodes 0..2 against the 6 nodes of layer l-1,
//   Lo (3x6): bottom nodes 3..5 against the 6 nodes of layer l+1.
// U of the surface layer and Lo of the bed layer are stored but unused.
inline constexpr int kBandedPerLayer = 72;
inline constexpr int kBandedBuffer = 36;

template <class Real>
struct BandedColumn {
  int layers = 0;
  std::vector<Real> data;

  BandedColumn() = default;
  explicit BandedColumn(int n) : layers(n), data(static_cast<std::size_t>(n) * kBandedPerLayer, Real(0)) {}

  Real& d(int l, int i, int j) { return data[l * kBandedPerLayer + i * 6 + j]; }
  Real& u(int l, int i, int j) { return data[l * kBandedPerLayer + 36 + i * 6 + j]; }
  Real& lo(int l, int i, int j) { return data[l * kBandedPerLayer + 54 + i * 6 + j]; }
  Real d(int l, int i, int j) const { return data[l * kBandedPerLayer + i * 6 + j]; }
  Real u(int l, int i, int j) const { return data[l * kBandedPerLayer + 36 + i * 6 + j]; }
  Real lo(int l, int i, int j) const { return data[l * kBandedPerLayer + 54 + i * 6 + j]; }
};

// In-place block elimination without pivoting. `a` must expose d/u/lo
// accessors returning references (BandedColumn or a test double), `rhs(l,
// k, f)` the right-hand side, overwritten with the solution. The D blocks
// are overwritten with their LU factors. At most kBandedBuffer matrix
// scalars are held locally at any time. Throws ZeroPivot.
template <class Real, class Matrix, class Rhs>
void solve_banded_column(Matrix& a, int layers, Rhs&& rhs, int components) {
  std::array<Real, kBandedBuffer> w;  // current diagonal block / its factors
  std::array<Real, 6> x;
  if (components < 1 || components > 2) throw ShapeMismatch("banded solve handles one or two components");
  std::array<Real, 2 * 6> z;

  auto factor = [&](int l) {
    for (int i = 0; i < 36; ++i) w[i] = a.d(l, i / 6, i % 6);
    for (int p = 0; p < 6; ++p) {
      const Real piv = w[p * 6 + p];
      if (piv == Real(0) || !std::isfinite(static_cast<double>(piv))) throw ZeroPivot(l, p);
      for (int i = p + 1; i < 6; ++i) {
        const Real m = w[i * 6 + p] / piv;
        w[i * 6 + p] = m;
        for (int j = p + 1; j < 6; ++j) w[i * 6 + j] -= m * w[p * 6 + j];
      }
    }
    for (int i = 0; i < 36; ++i) a.d(l, i / 6, i % 6) = w[i];
  };
  auto lower_solve = [&](Real* v) {
    for (int i = 1; i < 6; ++i) {
      for (int j = 0; j < i; ++j) v[i] -= w[i * 6 + j] * v[j];
    }
  };
  auto upper_solve = [&](Real* v) {
    for (int i = 5; i >= 0; --i) {
      for (int j = i + 1; j < 6; ++j) v[i] -= w[i * 6 + j] * v[j];
      v[i] /= w[i * 6 + i];
    }
  };

  for (int l = 0; l < layers; ++l) {
    factor(l);
    for (int f = 0; f < components; ++f) {
      Real* v = z.data() + 6 * f;
      for (int k = 0; k < 6; ++k) v[k] = rhs(l, k, f);
      lower_solve(v);
      for (int k = 0; k < 6; ++k) rhs(l, k, f) = v[k];
    }
    if (l + 1 == layers) break;
    // Schur complement on the next layer's top rows: D' -= U S^{-1} [0; Lo].
    for (int j = 0; j < 6; ++j) {
      x = {Real(0), Real(0), Real(0), a.lo(l, 0, j), a.lo(l, 1, j), a.lo(l, 2, j)};
      lower_solve(x.data());
      upper_solve(x.data());
      for (int i = 0; i < 3; ++i) {
        Real acc = Real(0);
        for (int k = 0; k < 6; ++k) acc += a.u(l + 1, i, k) * x[k];
        a.d(l + 1, i, j) -= acc;
      }
    }
    for (int f = 0; f < components; ++f) {
      Real* v = z.data() + 6 * f;
      upper_solve(v);
      for (int i = 0; i < 3; ++i) {
        Real acc = Real(0);
        for (int k = 0; k < 6; ++k) acc += a.u(l + 1, i, k) * v[k];
        rhs(l + 1, i, f) -= acc;
      }
    }
  }
  // Back substitution: x_l = U^{-1} (y_l - L^{-1} [0; Lo x_{l+1}]).
  for (int l = layers - 1; l >= 0; --l) {
    for (int i = 0; i < 36; ++i) w[i] = a.d(l, i / 6, i % 6);
    for (int f = 0; f < components; ++f) {
      Real* v = z.data() + 6 * f;
      if (l + 1 < layers) {
        x = {Real(0), Real(0), Real(0), Real(0), Real(0), Real(0)};
        for (int i = 0; i < 3; ++i) {
          Real acc = Real(0);
          for (int k = 0; k < 6; ++k) acc += a.lo(l, i, k) * rhs(l + 1, k, f);
          x[3 + i] = acc;
        }
        lower_solve(x.data());
        for (int k = 0; k < 6; ++k) v[k] = rhs(l, k, f) - x[k];
      } else {
        for (int k = 0; k < 6; ++k) v[k] = rhs(l, k, f);
      }
      upper_solve(v);
      for (int k = 0; k < 6; ++k) rhs(l, k, f) = v[k];
    }
  }
}

// Convenience overload: rhs stored as ((l*6 + k) * components + f).
template <class Real>
void solve_banded_column(BandedColumn<Real>& a, std::vector<Real>& rhs, int components) {
  if (rhs.size() != static_cast<std::size_t>(a.layers) * 6 * components) {
    throw ShapeMismatch("banded rhs size does not match the column");
  }
  solve_banded_column<Real>(a, a.layers,
                            [&](int l, int k, int f) -> Real& { return rhs[(l * 6 + k) * components + f]; },
                            components);
}

// Cell-batched banded matrices: entry e of layer l for matrix-column j at
// (l * 72 + e) * width + j. Padding columns and layers carry an identity D.
template <class Real>
struct BandedCell {
  int width = 0;
  int max_layers = 0;
  std::vector<int> layers;
  std::vector<Real> data;

  BandedCell(int w, std::vector<int> column_layers)
      : width(w), layers(std::move(column_layers)) {
    layers.resize(width, 0);
    for (int n : layers) max_layers = std::max(max_layers, n);
    data.assign(static_cast<std::size_t>(max_layers) * kBandedPerLayer * width, Real(0));
    for (int j = 0; j < width; ++j) {
      for (int l = layers[j]; l < max_layers; ++l) {
        for (int i = 0; i < 6; ++i) entry(l, i * 6 + i, j) = Real(1);
      }
    }
  }
  Real& entry(int l, int e, int j) { return data[(static_cast<std::size_t>(l) * kBandedPerLayer + e) * width + j]; }

  struct ColumnView {
    BandedCell* cell;
    int j;
    Real& d(int l, int i, int k) { return cell->entry(l, i * 6 + k, j); }
    Real& u(int l, int i, int k) { return cell->entry(l, 36 + i * 6 + k, j); }
    Real& lo(int l, int i, int k) { return cell->entry(l, 54 + i * 6 + k, j); }
  };
  ColumnView column(int j) { return ColumnView{this, j}; }
};

// Solves every matrix-column of the cell, padding included (identity
// blocks leave zero padding at zero).
template <class Real>
void solve_banded_cell(BandedCell<Real>& a, CellBlock<Real>& rhs) {
  if (rhs.width != a.width || rhs.max_layers != a.max_layers) {
    throw ShapeMismatch("banded cell and rhs cell differ in shape");
  }
  for (int j = 0; j < a.width; ++j) {
    auto view = a.column(j);
    solve_banded_column<Real>(view, a.max_layers,
                              [&](int l, int k, int f) -> Real& { return rhs.at(l, k, f, j); },
                              rhs.components);
  }
}

// Thomas algorithm; lower[0] and upper[n-1] are ignored. Throws ZeroPivot.
template <class Real>
std::vector<Real> solve_tridiagonal(const std::vector<Real>& lower, const std::vector<Real>& diag,
                                    const std::vector<Real>& upper, const std::vector<Real>& rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n) {
    throw ShapeMismatch("tridiagonal bands and rhs must have equal length");
  }
  std::vector<Real> c(n), x(n);
  Real den = diag[0];
  if (den == Real(0)) throw ZeroPivot(0, 0);
  c[0] = n > 1 ? upper[0] / den : Real(0);
  x[0] = rhs[0] / den;
  for (std::size_t i = 1; i < n; ++i) {
    den = diag[i] - lower[i] * c[i - 1];
    if (den == Real(0)) throw ZeroPivot(static_cast<int>(i), 0);
    c[i] = i + 1 < n ? upper[i] / den : Real(0);
    x[i] = (rhs[i] - lower[i] * x[i - 1]) / den;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
  return x;
}

}  // namespace prismdg
