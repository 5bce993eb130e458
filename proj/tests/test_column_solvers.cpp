#include <doctest.h>

#include <cmath>
#include <random>

#include "prismdg/column_solvers.hpp"
#include "prismdg/dense_oracle.hpp"
#include "prismdg/errors.hpp"
#include "support.hpp"

using namespace prismdg;
using testing::Dense;

namespace {

// Block coefficients (multiples of M_h, before the 1/2 prefactor) of the
// 3-layer column matrices, transcribed block row by block row. Block
// index 2l is the top face of layer l, 2l + 1 its bottom face.
constexpr double kDvu3[6][6] = {{-1, -1, 0, 0, 0, 0}, {1, -1, 0, 0, 0, 0},  {0, 2, -1, -1, 0, 0},
                                {0, 0, 1, -1, 0, 0},  {0, 0, 0, 2, -1, -1}, {0, 0, 0, 0, 1, -1}};
constexpr double kDvd3[6][6] = {{1, -1, 0, 0, 0, 0}, {1, 1, -2, 0, 0, 0}, {0, 0, 1, -1, 0, 0},
                                {0, 0, 1, 1, -2, 0}, {0, 0, 0, 0, 1, -1}, {0, 0, 0, 0, 1, 1}};

Dense from_blocks(const double (&c)[6][6], double j2d) {
  Dense d(18);
  for (int bi = 0; bi < 6; ++bi) {
    for (int bj = 0; bj < 6; ++bj) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) d(3 * bi + i, 3 * bj + j) = 0.5 * c[bi][bj] * j2d / 24.0 * (i == j ? 2 : 1);
      }
    }
  }
  return d;
}

template <class Solve>
std::vector<double> column_solve(std::vector<double> f, int layers, double j2d, Solve solve) {
  solve([&](int l, int k) -> double& { return f[6 * l + k]; }, layers, j2d);
  return f;
}

// Random block-banded column with a dominant diagonal block.
BandedColumn<double> random_banded(std::mt19937_64& rng, int layers) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  BandedColumn<double> a(layers);
  for (int l = 0; l < layers; ++l) {
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) a.d(l, i, j) = u(rng) + (i == j ? 20.0 : 0.0);
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 6; ++j) {
        if (l > 0) a.u(l, i, j) = u(rng);
        if (l + 1 < layers) a.lo(l, i, j) = u(rng);
      }
    }
  }
  return a;
}

// Dense expansion written from the block definitions alone.
Dense expand(const BandedColumn<double>& a) {
  Dense d(6 * a.layers);
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

}  // namespace

TEST_CASE("dense oracle reproduces the 3-layer displays") {
  for (double j2d : {24.0, 3.7}) {
    const DenseMatrix vu = assemble_dense_oracle(ColumnSystemKind::Dvu, 3, j2d);
    const DenseMatrix vd = assemble_dense_oracle(ColumnSystemKind::Dvd, 3, j2d);
    const Dense want_vu = from_blocks(kDvu3, j2d), want_vd = from_blocks(kDvd3, j2d);
    for (int i = 0; i < 18; ++i) {
      for (int j = 0; j < 18; ++j) {
        CHECK(vu(i, j) == doctest::Approx(want_vu(i, j)).epsilon(1e-15));
        CHECK(vd(i, j) == doctest::Approx(want_vd(i, j)).epsilon(1e-15));
      }
    }
  }
  SUBCASE("one Dvd layer is the first diagonal block") {
    const DenseMatrix d = assemble_dense_oracle(ColumnSystemKind::Dvd, 1, 24.0);
    const double sign[2][2] = {{1, -1}, {1, 1}};
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) CHECK(d(i, j) == 0.5 * sign[i / 3][j / 3] * (i % 3 == j % 3 ? 2.0 : 1.0));
    }
  }
}

TEST_CASE("Dvu factors without pivoting up to 64 layers") {
  for (int layers = 1; layers <= 64; ++layers) {
    CHECK(lu_without_pivoting_succeeds(assemble_dense_oracle(ColumnSystemKind::Dvu, layers, 1.0)));
  }
  // A zero leading entry needs a row exchange.
  DenseMatrix swap(2);
  swap(0, 1) = swap(1, 0) = 1.0;
  CHECK_FALSE(lu_without_pivoting_succeeds(swap));
}

TEST_CASE("matrix-free column solves match the displayed matrices") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const double j2d = 0.5 + 100.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto f = testing::random_vector(rng, 18);
    const auto r = column_solve(f, 3, j2d, [](auto&& at, int n, double j) { solve_r_column<double>(at, n, j); });
    const auto w = column_solve(f, 3, j2d, [](auto&& at, int n, double j) { solve_w_column<double>(at, n, j); });
    CHECK(testing::rel_err(r, testing::gauss_solve(from_blocks(kDvu3, j2d), f)) < 1e-12);
    CHECK(testing::rel_err(w, testing::gauss_solve(from_blocks(kDvd3, j2d), f)) < 1e-12);
  }
}

TEST_CASE("64-layer column solves against the dense oracle") {
  std::mt19937_64 rng(43);
  const DenseMatrix vu = assemble_dense_oracle(ColumnSystemKind::Dvu, 64, 2.0);
  const DenseMatrix vd = assemble_dense_oracle(ColumnSystemKind::Dvd, 64, 2.0);
  Dense dvu(vu.n), dvd(vd.n);
  dvu.a = vu.a;
  dvd.a = vd.a;
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = testing::random_vector(rng, 6 * 64);
    const auto r = column_solve(f, 64, 2.0, [](auto&& at, int n, double j) { solve_r_column<double>(at, n, j); });
    const auto w = column_solve(f, 64, 2.0, [](auto&& at, int n, double j) { solve_w_column<double>(at, n, j); });
    CHECK(testing::rel_err(r, testing::gauss_solve(dvu, f)) < 1e-11);
    CHECK(testing::rel_err(w, testing::gauss_solve(dvd, f)) < 1e-11);
  }
}

TEST_CASE("column solves are linear") {
  std::mt19937_64 rng(47);
  const auto x = testing::random_vector(rng, 30), y = testing::random_vector(rng, 30);
  std::vector<double> combo(30);
  for (int i = 0; i < 30; ++i) combo[i] = 2.5 * x[i] - 0.75 * y[i];
  auto solve = [](auto&& at, int n, double j) { solve_r_column<double>(at, n, j); };
  const auto sx = column_solve(x, 5, 3.0, solve), sy = column_solve(y, 5, 3.0, solve);
  const auto sc = column_solve(combo, 5, 3.0, solve);
  for (int i = 0; i < 30; ++i) CHECK(sc[i] == doctest::Approx(2.5 * sx[i] - 0.75 * sy[i]).epsilon(1e-13));
}

TEST_CASE("zero right-hand side gives zero and a singular mass is rejected") {
  std::vector<double> f(24, 0.0);
  const auto r = column_solve(f, 4, 1.0, [](auto&& at, int n, double j) { solve_r_column<double>(at, n, j); });
  CHECK(testing::max_abs(r) == 0.0);
  CHECK_THROWS_AS(column_solve(f, 4, 0.0, [](auto&& at, int n, double j) { solve_w_column<double>(at, n, j); }),
                  SingularMass);
}

TEST_CASE("cell-batched solves leave padding untouched") {
  FieldSoA<double> f(2, {3, 1});
  std::mt19937_64 rng(53);
  for (double& x : f.data()) x = std::uniform_real_distribution<double>(-1, 1)(rng);
  auto cells = soa_to_cell(f, make_cells(2, 4), 4);
  solve_r_cell<double>(cells[0], {1.0, 2.0});
  for (int k = 0; k < 6; ++k) {
    for (int c = 0; c < 2; ++c) {
      for (int l = 0; l < 3; ++l) {
        CHECK(cells[0].at(l, k, c, 2) == 0.0);
        CHECK(cells[0].at(l, k, c, 3) == 0.0);
        if (l > 0) CHECK(cells[0].at(l, k, c, 1) == 0.0);
      }
    }
  }
  // The real columns agree with one-column solves.
  std::vector<double> col(18);
  for (int l = 0; l < 3; ++l) {
    for (int k = 0; k < 6; ++k) col[6 * l + k] = f.at(1, k, l);
  }
  const auto want = column_solve(col, 3, 1.0, [](auto&& at, int n, double j) { solve_r_column<double>(at, n, j); });
  for (int l = 0; l < 3; ++l) {
    for (int k = 0; k < 6; ++k) CHECK(cells[0].at(l, k, 1, 0) == want[6 * l + k]);
  }
}

TEST_CASE("banded elimination") {
  std::mt19937_64 rng(59);
  SUBCASE("block identity returns the right-hand side") {
    BandedColumn<double> a(5);
    for (int l = 0; l < 5; ++l) {
      for (int i = 0; i < 6; ++i) a.d(l, i, i) = 1.0;
    }
    auto rhs = testing::random_vector(rng, 60);
    const auto want = rhs;
    solve_banded_column(a, rhs, 2);
    CHECK(rhs == want);
  }
  SUBCASE("random dominant 32-layer systems match dense elimination") {
    for (int trial = 0; trial < 200; ++trial) {
      BandedColumn<double> a = random_banded(rng, 32);
      const Dense dense = expand(a);
      auto rhs = testing::random_vector(rng, 6 * 32);
      const auto want = testing::gauss_solve(dense, rhs);
      solve_banded_column(a, rhs, 1);
      CHECK(testing::rel_err(rhs, want) < 1e-10);
    }
  }
  SUBCASE("two components are solved independently") {
    BandedColumn<double> a = random_banded(rng, 6);
    BandedColumn<double> b = a;
    const Dense dense = expand(a);
    const auto f0 = testing::random_vector(rng, 36), f1 = testing::random_vector(rng, 36);
    std::vector<double> both(72);
    for (int i = 0; i < 36; ++i) {
      both[2 * i] = f0[i];
      both[2 * i + 1] = f1[i];
    }
    solve_banded_column(b, both, 2);
    const auto x0 = testing::gauss_solve(dense, f0), x1 = testing::gauss_solve(dense, f1);
    for (int i = 0; i < 36; ++i) {
      CHECK(both[2 * i] == doctest::Approx(x0[i]).epsilon(1e-12));
      CHECK(both[2 * i + 1] == doctest::Approx(x1[i]).epsilon(1e-12));
    }
  }
  SUBCASE("constant columns stay constant under mass plus vertical diffusion") {
    // Rows of (M + dt K) with K a stiffness whose rows sum to zero: the
    // constant vector is reproduced when the rhs is M times a constant.
    const int layers = 8;
    BandedColumn<double> a(layers);
    std::vector<double> rhs(6 * layers, 0.0);
    const double k = 0.7;
    for (int l = 0; l < layers; ++l) {
      for (int i = 0; i < 6; ++i) {
        a.d(l, i, i) = 1.0;
        rhs[6 * l + i] = 3.0;
      }
      for (int h = 0; h < 3; ++h) {
        // Couple the two faces of the layer and faces across interfaces.
        a.d(l, h, h) += k;
        a.d(l, h, h + 3) -= k;
        a.d(l, h + 3, h + 3) += k;
        a.d(l, h + 3, h) -= k;
        if (l > 0) {
          a.d(l, h, h) += k;
          a.u(l, h, h + 3) -= k;
        }
        if (l + 1 < layers) {
          a.d(l, h + 3, h + 3) += k;
          a.lo(l, h, h) -= k;
        }
      }
    }
    solve_banded_column(a, rhs, 1);
    for (double x : rhs) CHECK(x == doctest::Approx(3.0).epsilon(1e-13));
  }
  SUBCASE("zero pivot is reported with its location") {
    BandedColumn<double> a(3);
    for (int l = 0; l < 3; ++l) {
      for (int i = 0; i < 6; ++i) a.d(l, i, i) = 1.0;
    }
    a.d(1, 4, 4) = 0.0;
    std::vector<double> rhs(18, 1.0);
    try {
      solve_banded_column(a, rhs, 1);
      FAIL("expected ZeroPivot");
    } catch (const ZeroPivot& e) {
      CHECK(e.layer() == 1);
      CHECK(e.node() == 4);
    }
  }
}

TEST_CASE("tridiagonal solver") {
  SUBCASE("identity") {
    const std::vector<double> rhs = {1.0, -2.0, 3.5};
    CHECK(solve_tridiagonal<double>({0, 0, 0}, {1, 1, 1}, {0, 0, 0}, rhs) == rhs);
  }
  SUBCASE("three-point Poisson") {
    const auto x = solve_tridiagonal<double>({0, -1, -1}, {2, 2, 2}, {-1, -1, 0}, {1, 1, 1});
    CHECK(x[0] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(x[2] == doctest::Approx(1.5).epsilon(1e-15));
  }
  SUBCASE("random dominant system of size 100") {
    std::mt19937_64 rng(61);
    const int n = 100;
    auto lo = testing::random_vector(rng, n), up = testing::random_vector(rng, n);
    auto di = testing::random_vector(rng, n, 3.0, 5.0);
    const auto rhs = testing::random_vector(rng, n);
    Dense d(n);
    for (int i = 0; i < n; ++i) {
      d(i, i) = di[i];
      if (i > 0) d(i, i - 1) = lo[i];
      if (i + 1 < n) d(i, i + 1) = up[i];
    }
    CHECK(testing::rel_err(solve_tridiagonal(lo, di, up, rhs), testing::gauss_solve(d, rhs)) < 1e-12);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(solve_tridiagonal<double>({0, 0}, {0, 1}, {0, 0}, {1, 1}), ZeroPivot);
    CHECK_THROWS_AS(solve_tridiagonal<double>({0}, {1, 1}, {0, 0}, {1, 1}), ShapeMismatch);
  }
}
