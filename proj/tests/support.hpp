#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "prismdg/mesh.hpp"

namespace testing {

// Row-major dense matrix for test-side oracles.
struct Dense {
  int n = 0;
  std::vector<double> a;
  explicit Dense(int size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

// Gaussian elimination with partial pivoting, written independently of the
// library's dense path.
inline std::vector<double> gauss_solve(Dense m, std::vector<double> b) {
  const int n = m.n;
  for (int p = 0; p < n; ++p) {
    int best = p;
    for (int i = p + 1; i < n; ++i) {
      if (std::abs(m(i, p)) > std::abs(m(best, p))) best = i;
    }
    if (m(best, p) == 0.0) throw std::runtime_error("singular test matrix");
    if (best != p) {
      for (int j = 0; j < n; ++j) std::swap(m(p, j), m(best, j));
      std::swap(b[p], b[best]);
    }
    for (int i = p + 1; i < n; ++i) {
      const double f = m(i, p) / m(p, p);
      for (int j = p; j < n; ++j) m(i, j) -= f * m(p, j);
      b[i] -= f * b[p];
    }
  }
  std::vector<double> x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= m(i, j) * x[j];
    x[i] = s / m(i, i);
  }
  return x;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double rel_err(const std::vector<double>& got, const std::vector<double>& want) {
  double d = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) d = std::max(d, std::abs(got[i] - want[i]));
  return d / std::max(max_abs(want), 1e-300);
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline std::shared_ptr<const prismdg::Mesh2D> basin(int nx, int ny, double lx, double ly,
                                                    const prismdg::BedFunction& bed) {
  return std::make_shared<const prismdg::Mesh2D>(prismdg::generate_basin_mesh(nx, ny, lx, ly, bed));
}

}  // namespace testing
