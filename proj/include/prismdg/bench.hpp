#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "prismdg/partition.hpp"

namespace prismdg {

struct LayoutBenchOptions {
  int columns = 1000;
  int layers = 32;
  int components = 2;
  std::vector<int> widths = {2, 8, 32, 128};
  int repeats = 5;
};

// One transposition measurement. Strides are mean absolute distances (in
// elements) between consecutive accesses of the soa->cell copy.
struct LayoutRow {
  std::string precision;
  int width = 0;
  int columns = 0;
  int layers = 0;
  double seconds = 0.0;  // best soa->cell->soa round trip
  double gbytes_per_s = 0.0;
  double soa_stride = 0.0;
  double cell_stride = 0.0;
  double utilization = 0.0;  // block-shape lane use for this layer count
  bool verified = false;     // round trip bitwise equal
};

std::vector<LayoutRow> layout_bench(const LayoutBenchOptions& options);
void write_layout_csv(std::ostream& out, const std::vector<LayoutRow>& rows);

struct ScalingOptions {
  std::vector<int> ranks = {1, 2, 4};
  int nx = 16;
  int ny = 16;
  int layers = 10;
  int steps = 3;
  int external_steps = 20;
  double dt = 100.0;
};

struct ScalingRow {
  int ranks = 0;
  double seconds_per_step = 0.0;
  double imbalance = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  AmdahlFit fit;
};

// Wall time per internal step of the uniform-advection scenario for each
// rank count, with the T(P) = a + b/P fit. Throws ConfigError on an empty
// mesh.
ScalingReport scaling_bench(const ScalingOptions& options);
void write_scaling_csv(std::ostream& out, const ScalingReport& report);

}  // namespace prismdg
