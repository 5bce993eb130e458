#include "prismdg/dense_oracle.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace prismdg {

namespace {

// Adds s * M_h into the 3x3 block at (row, col).
void add_mass(DenseMatrix& d, int row, int col, double s, double j2d) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) d(row + i, col + j) += s * j2d / 24.0 * (i == j ? 2.0 : 1.0);
  }
}

}  // namespace

DenseMatrix assemble_dense_oracle(ColumnSystemKind kind, int layers, double j2d) {
  DenseMatrix d(6 * layers);
  for (int l = 0; l < layers; ++l) {
    const int t = 6 * l;
    const int b = 6 * l + 3;
    if (kind == ColumnSystemKind::Dvu) {
      // 1/2 [[-M, -M], [M, -M]] on the diagonal, 1/2 * 2M linking the top
      // rows to the bottom nodes of the layer above.
      add_mass(d, t, t, -0.5, j2d);
      add_mass(d, t, b, -0.5, j2d);
      add_mass(d, b, t, 0.5, j2d);
      add_mass(d, b, b, -0.5, j2d);
      if (l > 0) add_mass(d, t, 6 * (l - 1) + 3, 1.0, j2d);
    } else if (kind == ColumnSystemKind::Dvd) {
      // 1/2 [[M, -M], [M, M]] on the diagonal, -1/2 * 2M linking the bottom
      // rows to the top nodes of the layer below.
      add_mass(d, t, t, 0.5, j2d);
      add_mass(d, t, b, -0.5, j2d);
      add_mass(d, b, t, 0.5, j2d);
      add_mass(d, b, b, 0.5, j2d);
      if (l + 1 < layers) add_mass(d, b, 6 * (l + 1), -1.0, j2d);
    } else {
      throw Error("dense oracle has no fixed pattern for this system kind");
    }
  }
  return d;
}

DenseMatrix banded_to_dense(const BandedColumn<double>& a) {
  DenseMatrix d(6 * a.layers);
  for (int l = 0; l < a.layers; ++l) {
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) d(6 * l + i, 6 * l + j) = a.d(l, i, j);
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 6; ++j) {
        if (l > 0) d(6 * l + i, 6 * (l - 1) + j) = a.u(l, i, j);
        if (l + 1 < a.layers) d(6 * l + 3 + i, 6 * (l + 1) + j) = a.lo(l, i, j);
      }
    }
  }
  return d;
}

std::vector<double> dense_solve(const DenseMatrix& a, const std::vector<double>& rhs) {
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      a.a.data(), a.n, a.n);
  Eigen::Map<const Eigen::VectorXd> b(rhs.data(), a.n);
  Eigen::VectorXd x = m.partialPivLu().solve(b);
  return {x.data(), x.data() + x.size()};
}

std::vector<double> dense_apply(const DenseMatrix& a, const std::vector<double>& x) {
  std::vector<double> y(a.n, 0.0);
  for (int i = 0; i < a.n; ++i) {
    for (int j = 0; j < a.n; ++j) y[i] += a(i, j) * x[j];
  }
  return y;
}

bool lu_without_pivoting_succeeds(const DenseMatrix& a) {
  DenseMatrix w = a;
  double scale = 0.0;
  for (double v : a.a) scale = std::max(scale, std::abs(v));
  for (int p = 0; p < w.n; ++p) {
    if (std::abs(w(p, p)) <= 1e-14 * scale) return false;
    for (int i = p + 1; i < w.n; ++i) {
      const double m = w(i, p) / w(p, p);
      if (m == 0.0) continue;
      for (int j = p; j < w.n; ++j) w(i, j) -= m * w(p, j);
    }
  }
  return true;
}

}  // namespace prismdg
