#include "prismdg/layout.hpp"

#include <algorithm>

namespace prismdg {

std::vector<std::vector<int>> make_cells(int num_columns, int width) {
  if (width < 1) throw ShapeMismatch("cell width must be >= 1");
  std::vector<std::vector<int>> cells;
  for (int c0 = 0; c0 < num_columns; c0 += width) {
    std::vector<int> cols(std::min(width, num_columns - c0));
    std::iota(cols.begin(), cols.end(), c0);
    cells.push_back(std::move(cols));
  }
  return cells;
}

BlockShape choose_block_shape(int max_layers, int per_layer_rows, int cell_width) {
  if (max_layers < 1) throw ShapeMismatch("block shape needs max_layers >= 1");
  int limit = std::min(kMaxTileColumns, std::max(1, kBlockLanes / max_layers));
  int n = 1;
  for (int cand = limit; cand >= 1; --cand) {
    if (cell_width % cand == 0) {
      n = cand;
      break;
    }
  }
  BlockShape s;
  s.n = n;
  s.layers_per_pass = kBlockLanes / n;
  s.rows_per_pass = s.layers_per_pass * per_layer_rows;
  s.read_chunk = kBlockLanes / n;
  s.write_chunk = n;
  s.passes = (max_layers + s.layers_per_pass - 1) / s.layers_per_pass;
  s.utilization =
      static_cast<double>(n * std::min(max_layers, s.layers_per_pass)) / kBlockLanes;
  return s;
}

}  // namespace prismdg
