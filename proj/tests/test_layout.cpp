#include <doctest.h>

#include <cstring>
#include <limits>
#include <random>

#include "prismdg/errors.hpp"
#include "prismdg/layout.hpp"

using namespace prismdg;

namespace {

template <class Real>
FieldSoA<Real> random_field(std::mt19937_64& rng, int comps, std::vector<int> layers) {
  FieldSoA<Real> f(comps, std::move(layers));
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (Real& x : f.data()) x = static_cast<Real>(u(rng));
  return f;
}

template <class Real>
bool bitwise_equal(const FieldSoA<Real>& a, const FieldSoA<Real>& b) {
  return a.same_shape(b) && std::memcmp(a.data().data(), b.data().data(), a.data().size() * sizeof(Real)) == 0;
}

}  // namespace

TEST_CASE("cell ordering of a 2-column 2-layer scalar field") {
  // SoA order is node -> column -> layer, so value v sits at
  // node v / 4, column (v % 4) / 2, layer v % 2.
  FieldSoA<double> f(1, {2, 2});
  for (int i = 0; i < 24; ++i) f.data()[i] = i;
  const auto cells = soa_to_cell(f, make_cells(2, 2), 2);
  REQUIRE(cells.size() == 1);
  // Rows run layer -> node, one matrix-column per prism column.
  const std::vector<double> golden = {
      0, 2,  4, 6,  8, 10,  12, 14,  16, 18,  20, 22,   // layer 0, nodes 0..5
      1, 3,  5, 7,  9, 11,  13, 15,  17, 19,  21, 23};  // layer 1
  CHECK(cells[0].data == golden);
  CHECK(cells[0].rows() == 12);
}

TEST_CASE("zero field gives zero cells") {
  FieldSoA<float> f(2, {3, 1, 4});
  for (const auto& b : soa_to_cell(f, make_cells(3, 4), 4)) {
    for (float x : b.data) CHECK(x == 0.0f);
  }
}

TEST_CASE("round trips restore the field bitwise") {
  std::mt19937_64 rng(99);
  SUBCASE("unequal layer counts in one cell") {
    const auto f = random_field<double>(rng, 2, {2, 3});
    const auto cells = soa_to_cell(f, make_cells(2, 4), 4);
    // The shallow column and the two padding columns stay zero.
    for (int k = 0; k < kPrismNodes; ++k) {
      for (int c = 0; c < 2; ++c) {
        CHECK(cells[0].at(2, k, c, 0) == 0.0);
        CHECK(cells[0].at(0, k, c, 2) == 0.0);
        CHECK(cells[0].at(2, k, c, 3) == 0.0);
      }
    }
    CHECK(bitwise_equal(cell_to_soa(cells), f));
  }
  SUBCASE("100 random trials in both precisions") {
    std::uniform_int_distribution<int> nl(1, 12), nc(1, 40), width(1, 16);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<int> layers(nc(rng));
      for (int& n : layers) n = nl(rng);
      const int w = width(rng);
      const auto fd = random_field<double>(rng, 1 + trial % 2, layers);
      const auto ff = random_field<float>(rng, 2 - trial % 2, layers);
      const auto cells = make_cells(static_cast<int>(layers.size()), w);
      CHECK(bitwise_equal(cell_to_soa(soa_to_cell(fd, cells, w)), fd));
      FieldSoA<float> back(ff.components(), layers);
      cell_to_soa(soa_to_cell(ff, cells, w), back);
      CHECK(bitwise_equal(back, ff));
    }
  }
  SUBCASE("special values survive") {
    FieldSoA<double> f(1, {1});
    f.data() = {-0.0, std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::max(), -1.5, 1e-310};
    CHECK(bitwise_equal(cell_to_soa(soa_to_cell(f, make_cells(1, 8), 8)), f));
  }
}

TEST_CASE("single column with one layer matches up to row order") {
  std::mt19937_64 rng(7);
  const auto f = random_field<double>(rng, 1, {1});
  const auto cells = soa_to_cell(f, make_cells(1, 1), 1);
  CHECK(cells[0].data == f.data());
}

TEST_CASE("malformed cell partitions are rejected") {
  FieldSoA<double> f(1, {1, 1, 1});
  CHECK_THROWS_AS(soa_to_cell(f, {{0, 1}, {1, 2}}, 2), ShapeMismatch);
  CHECK_THROWS_AS(soa_to_cell(f, {{0, 1}}, 2), ShapeMismatch);
  CHECK_THROWS_AS(soa_to_cell(f, {{0, 1, 2}}, 2), ShapeMismatch);
  FieldSoA<double> other(1, {2, 1, 1});
  CHECK_THROWS_AS(cell_to_soa(soa_to_cell(f, make_cells(3, 4), 4), other), ShapeMismatch);
}

TEST_CASE("block shape selection") {
  CHECK(choose_block_shape(16, kPrismNodes, 128).n == 8);
  CHECK(choose_block_shape(16, kPrismNodes, 128).layers_per_pass == 16);
  CHECK(choose_block_shape(1, kPrismNodes, 128).n == 32);
  CHECK(choose_block_shape(128, kPrismNodes, 128).n == 1);
  for (int layers = 1; layers <= 128; ++layers) {
    const BlockShape s = choose_block_shape(layers, kPrismNodes, 128);
    CHECK(128 % s.n == 0);
    CHECK(s.n <= kMaxTileColumns);
    CHECK(s.n * std::min(layers, s.layers_per_pass) <= kBlockLanes);
    CHECK(s.utilization > 0.0);
    CHECK(s.utilization <= 1.0);
  }
}
