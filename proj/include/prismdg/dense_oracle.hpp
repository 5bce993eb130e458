#pragma once

#include <vector>

#include "prismdg/column_solvers.hpp"

namespace prismdg {

// Row-major dense matrix used only by the oracle checks.
struct DenseMatrix {
  int n = 0;
  std::vector<double> a;

  explicit DenseMatrix(int size = 0) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

// Column system written out block by block for `layers` layers with the 2D
// mass matrix of a triangle with Jacobian j2d. Unknown ordering: layer l,
// node k -> 6 l + k. Only Dvu and Dvd have a fixed pattern.
DenseMatrix assemble_dense_oracle(ColumnSystemKind kind, int layers, double j2d);

// Expands a banded column to dense form (same ordering).
DenseMatrix banded_to_dense(const BandedColumn<double>& a);

// Dense solve with partial pivoting LU.
std::vector<double> dense_solve(const DenseMatrix& a, const std::vector<double>& rhs);

// y = A x.
std::vector<double> dense_apply(const DenseMatrix& a, const std::vector<double>& x);

// True if Doolittle LU without row exchanges meets no zero pivot.
bool lu_without_pivoting_succeeds(const DenseMatrix& a);

}  // namespace prismdg
