#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <span>
#include <vector>

#include "prismdg/errors.hpp"

namespace prismdg {

inline constexpr int kPrismNodes = 6;

// Nodal DG field on prisms in structure-of-arrays order:
// component -> local node -> column -> layer. Prism p = offset(c) + l.
template <class Real>
class FieldSoA {
 public:
  FieldSoA() = default;
  FieldSoA(int components, std::vector<int> layers_per_column)
      : components_(components), layers_(std::move(layers_per_column)) {
    if (components_ < 1) throw ShapeMismatch("field needs at least one component");
    offset_.assign(layers_.size() + 1, 0);
    for (std::size_t c = 0; c < layers_.size(); ++c) offset_[c + 1] = offset_[c] + layers_[c];
    data_.assign(static_cast<std::size_t>(components_) * kPrismNodes * num_prisms(), Real(0));
  }

  int components() const { return components_; }
  int num_columns() const { return static_cast<int>(layers_.size()); }
  int num_prisms() const { return offset_.empty() ? 0 : offset_.back(); }
  int layers(int col) const { return layers_[col]; }
  int offset(int col) const { return offset_[col]; }
  const std::vector<int>& layer_counts() const { return layers_; }

  std::size_t index(int f, int k, int prism) const {
    const auto np = static_cast<std::size_t>(num_prisms());
    return (static_cast<std::size_t>(f) * kPrismNodes + k) * np + prism;
  }
  std::size_t index(int f, int k, int col, int layer) const {
    return index(f, k, offset_[col] + layer);
  }

  Real& at(int f, int k, int prism) { return data_[index(f, k, prism)]; }
  Real at(int f, int k, int prism) const { return data_[index(f, k, prism)]; }

  std::vector<Real>& data() { return data_; }
  const std::vector<Real>& data() const { return data_; }

  bool same_shape(const FieldSoA& o) const {
    return components_ == o.components_ && layers_ == o.layers_;
  }

 private:
  int components_ = 1;
  std::vector<int> layers_;
  std::vector<int> offset_;
  std::vector<Real> data_;
};

// One cell of the column-blocked layout: a matrix with one matrix-column
// per prism column (width C) and per-layer unrolled rows ordered
// layer -> node -> component. Memory order is row-major, so consecutive
// prism columns of one row are contiguous. Columns past the real ones and
// layers past a shallow column's depth are padding, kept at zero.
template <class Real>
struct CellBlock {
  int width = 0;        // C
  int components = 1;
  int max_layers = 0;   // deepest column in the cell
  std::vector<int> columns;  // global column ids, size <= width
  std::vector<int> layers;   // per matrix-column, 0 for padding columns
  std::vector<Real> data;

  int rows() const { return max_layers * kPrismNodes * components; }
  static int row(int layer, int node, int f, int comps) {
    return (layer * kPrismNodes + node) * comps + f;
  }
  std::size_t index(int layer, int node, int f, int j) const {
    return static_cast<std::size_t>(row(layer, node, f, components)) * width + j;
  }
  Real& at(int layer, int node, int f, int j) { return data[index(layer, node, f, j)]; }
  Real at(int layer, int node, int f, int j) const { return data[index(layer, node, f, j)]; }
};

// Consecutive groups of `width` columns in storage (Hilbert) order.
std::vector<std::vector<int>> make_cells(int num_columns, int width);

// Copies the listed columns of `field` into one cell of the given width.
template <class Real>
CellBlock<Real> gather_cell(const FieldSoA<Real>& field, std::span<const int> cols, int width) {
  if (static_cast<int>(cols.size()) > width) {
    throw ShapeMismatch("cell holds " + std::to_string(cols.size()) + " columns, width is " +
                        std::to_string(width));
  }
  CellBlock<Real> b;
  b.width = width;
  b.components = field.components();
  b.columns.assign(cols.begin(), cols.end());
  b.layers.assign(width, 0);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= field.num_columns()) {
      throw ShapeMismatch("column " + std::to_string(cols[j]) + " is outside the field");
    }
    b.layers[j] = field.layers(cols[j]);
    b.max_layers = std::max(b.max_layers, b.layers[j]);
  }
  b.data.assign(static_cast<std::size_t>(b.rows()) * width, Real(0));
  for (int l = 0; l < b.max_layers; ++l) {
    for (int k = 0; k < kPrismNodes; ++k) {
      for (int f = 0; f < b.components; ++f) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
          if (l < b.layers[j]) b.at(l, k, f, static_cast<int>(j)) = field.at(f, k, field.offset(cols[j]) + l);
        }
      }
    }
  }
  return b;
}

template <class Real>
std::vector<CellBlock<Real>> soa_to_cell(const FieldSoA<Real>& field,
                                         const std::vector<std::vector<int>>& cells, int width) {
  std::vector<int> seen(field.num_columns(), 0);
  std::vector<CellBlock<Real>> out;
  out.reserve(cells.size());
  for (const auto& cols : cells) {
    for (int c : cols) {
      if (c < 0 || c >= field.num_columns() || seen[c]++) {
        throw ShapeMismatch("cell partition does not cover column " + std::to_string(c) +
                            " exactly once");
      }
    }
    out.push_back(gather_cell<Real>(field, cols, width));
  }
  for (int c = 0; c < field.num_columns(); ++c) {
    if (seen[c] != 1) throw ShapeMismatch("cell partition misses column " + std::to_string(c));
  }
  return out;
}

// Writes the non-padded entries of `blocks` into `field`.
template <class Real>
void cell_to_soa(const std::vector<CellBlock<Real>>& blocks, FieldSoA<Real>& field) {
  for (const auto& b : blocks) {
    if (b.components != field.components()) {
      throw ShapeMismatch("cell has " + std::to_string(b.components) + " components, field has " +
                          std::to_string(field.components()));
    }
    for (std::size_t j = 0; j < b.columns.size(); ++j) {
      const int c = b.columns[j];
      if (c < 0 || c >= field.num_columns() || field.layers(c) != b.layers[j]) {
        throw ShapeMismatch("cell column " + std::to_string(c) + " does not match the field");
      }
      for (int l = 0; l < b.layers[j]; ++l) {
        for (int k = 0; k < kPrismNodes; ++k) {
          for (int f = 0; f < b.components; ++f) {
            field.at(f, k, field.offset(c) + l) = b.at(l, k, f, static_cast<int>(j));
          }
        }
      }
    }
  }
}

// Rebuilds a field from cells alone; every column id in [0, N) must appear once.
template <class Real>
FieldSoA<Real> cell_to_soa(const std::vector<CellBlock<Real>>& blocks) {
  int ncols = 0;
  int comps = blocks.empty() ? 1 : blocks.front().components;
  for (const auto& b : blocks) {
    if (b.components != comps) throw ShapeMismatch("cells disagree on component count");
    for (int c : b.columns) ncols = std::max(ncols, c + 1);
  }
  std::vector<int> layers(ncols, -1);
  for (const auto& b : blocks) {
    for (std::size_t j = 0; j < b.columns.size(); ++j) {
      if (layers[b.columns[j]] != -1) {
        throw ShapeMismatch("column " + std::to_string(b.columns[j]) + " appears twice");
      }
      layers[b.columns[j]] = b.layers[j];
    }
  }
  for (int c = 0; c < ncols; ++c) {
    if (layers[c] < 1) throw ShapeMismatch("column " + std::to_string(c) + " missing from cells");
  }
  FieldSoA<Real> field(comps, layers);
  cell_to_soa(blocks, field);
  return field;
}

// Tiling of one cell for a 128-lane block handling n columns per tile.
struct BlockShape {
  int n = 1;            // columns per tile
  int layers_per_pass = 128;  // floor(128 / n)
  int rows_per_pass = 0;      // layers_per_pass * per-layer rows
  int read_chunk = 128;       // contiguous values read from the SoA layout
  int write_chunk = 1;        // contiguous values written to the cell
  int passes = 1;
  double utilization = 1.0;   // active lanes / 128 over one pass
};

inline constexpr int kBlockLanes = 128;
inline constexpr int kMaxTileColumns = 32;

// Largest n <= min(32, floor(128 / max_layers)) dividing the cell width;
// this keeps a whole column (or as much as fits) in one pass, favoring the
// vertical extent.
BlockShape choose_block_shape(int max_layers, int per_layer_rows, int cell_width = 128);

}  // namespace prismdg
