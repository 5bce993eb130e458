#include "prismdg/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <ostream>
#include <random>

#include "prismdg/errors.hpp"
#include "prismdg/io.hpp"
#include "prismdg/layout.hpp"
#include "prismdg/run.hpp"
#include "prismdg/scenarios.hpp"

namespace prismdg {

namespace {

// Replays the soa->cell traversal and averages the address distance
// between consecutive reads (SoA side) and writes (cell side).
template <class Real>
void transposition_strides(const FieldSoA<Real>& f, const std::vector<std::vector<int>>& cells, int width,
                           double& soa_stride, double& cell_stride) {
  double soa_sum = 0.0, cell_sum = 0.0;
  long count = 0;
  long prev_soa = -1, prev_cell = -1;
  long cell_base = 0;
  for (const auto& cols : cells) {
    int max_layers = 0;
    for (int c : cols) max_layers = std::max(max_layers, f.layers(c));
    for (int l = 0; l < max_layers; ++l) {
      for (int k = 0; k < kPrismNodes; ++k) {
        for (int comp = 0; comp < f.components(); ++comp) {
          for (std::size_t j = 0; j < cols.size(); ++j) {
            if (l >= f.layers(cols[j])) continue;
            const long s = static_cast<long>(f.index(comp, k, cols[j], l));
            const long c = cell_base + static_cast<long>(CellBlock<Real>::row(l, k, comp, f.components())) * width +
                           static_cast<long>(j);
            if (prev_soa >= 0) {
              soa_sum += std::abs(s - prev_soa);
              cell_sum += std::abs(c - prev_cell);
              ++count;
            }
            prev_soa = s;
            prev_cell = c;
          }
        }
      }
    }
    cell_base += static_cast<long>(max_layers) * kPrismNodes * f.components() * width;
  }
  soa_stride = count ? soa_sum / count : 0.0;
  cell_stride = count ? cell_sum / count : 0.0;
}

template <class Real>
LayoutRow layout_case(const LayoutBenchOptions& o, int width, const char* precision) {
  std::vector<int> layers(o.columns, o.layers);
  FieldSoA<Real> f(o.components, layers);
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Real& x : f.data()) x = static_cast<Real>(u(rng));
  FieldSoA<Real> back(o.components, layers);
  const auto cells = make_cells(o.columns, width);

  LayoutRow row;
  row.precision = precision;
  row.width = width;
  row.columns = o.columns;
  row.layers = o.layers;
  row.seconds = std::numeric_limits<double>::infinity();
  row.verified = true;
  for (int rep = 0; rep < o.repeats; ++rep) {
    std::fill(back.data().begin(), back.data().end(), Real(0));
    const auto t0 = std::chrono::steady_clock::now();
    const auto blocks = soa_to_cell(f, cells, width);
    cell_to_soa(blocks, back);
    row.seconds = std::min(row.seconds, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    row.verified = row.verified &&
                   std::memcmp(back.data().data(), f.data().data(), f.data().size() * sizeof(Real)) == 0;
  }
  const double bytes = 2.0 * static_cast<double>(f.data().size() * sizeof(Real));
  row.gbytes_per_s = bytes / row.seconds / 1e9;
  transposition_strides(f, cells, width, row.soa_stride, row.cell_stride);
  row.utilization = choose_block_shape(o.layers, kPrismNodes, width).utilization;
  return row;
}

}  // namespace

std::vector<LayoutRow> layout_bench(const LayoutBenchOptions& options) {
  if (options.columns < 1 || options.layers < 1) throw ConfigError("layout bench needs a non-empty mesh");
  std::vector<LayoutRow> rows;
  for (int w : options.widths) {
    rows.push_back(layout_case<float>(options, w, "fp32"));
    rows.push_back(layout_case<double>(options, w, "fp64"));
  }
  return rows;
}

void write_layout_csv(std::ostream& out, const std::vector<LayoutRow>& rows) {
  out << "precision,cell_width,columns,layers,seconds,gbytes_per_s,soa_stride,cell_stride,utilization,verified\n";
  for (const LayoutRow& r : rows) {
    out << r.precision << ',' << r.width << ',' << r.columns << ',' << r.layers << ',' << format_double(r.seconds)
        << ',' << format_double(r.gbytes_per_s) << ',' << format_double(r.soa_stride) << ','
        << format_double(r.cell_stride) << ',' << format_double(r.utilization) << ','
        << (r.verified ? "true" : "false") << '\n';
  }
}

ScalingReport scaling_bench(const ScalingOptions& options) {
  if (options.nx < 1 || options.ny < 1) throw ConfigError("scaling bench needs a non-empty mesh");
  if (options.ranks.empty()) throw ConfigError("scaling bench needs at least one rank count");
  ScenarioSpec spec;
  spec.name = "uniform_advection";
  spec.nx = options.nx;
  spec.ny = options.ny;
  spec.layers = options.layers;
  PhysParams p;
  p.kappa_v = 1e-3;
  p.nu_v = 1e-4;
  const Scenario sc = make_scenario(spec, p);
  ModelOptions mo;
  mo.external_steps = options.external_steps;

  std::vector<int> weights(sc.mesh->num_triangles(), options.layers);
  ScalingReport report;
  std::vector<double> times;
  for (int P : options.ranks) {
    RunOptions ro;
    ro.dt = options.dt;
    ro.steps = options.steps;
    ro.ranks = P;
    const RunResult r = run_scenario(sc, mo, ro);
    const double per_step = r.loop_seconds / std::max(1, options.steps);
    report.rows.push_back({P, per_step, load_imbalance(decompose(*sc.mesh, P, weights), weights)});
    times.push_back(per_step);
  }
  report.fit = amdahl_fit(options.ranks, times);
  return report;
}

void write_scaling_csv(std::ostream& out, const ScalingReport& report) {
  out << "ranks,seconds_per_step,load_imbalance,fit_serial,fit_parallel,fit_r2\n";
  for (const ScalingRow& r : report.rows) {
    out << r.ranks << ',' << format_double(r.seconds_per_step) << ',' << format_double(r.imbalance) << ','
        << format_double(report.fit.serial) << ',' << format_double(report.fit.parallel) << ','
        << format_double(report.fit.r2) << '\n';
  }
}

}  // namespace prismdg
