#include "prismdg/scenarios.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "prismdg/errors.hpp"
#include "prismdg/tracer.hpp"

namespace prismdg {

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"lake_at_rest", "standing_wave", "lock_exchange", "wind_column",
                                                 "uniform_advection"};
  return names;
}

std::vector<double> interpolate_2d(const Mesh2D& mesh, const std::function<double(double, double)>& f) {
  std::vector<double> out(static_cast<std::size_t>(mesh.num_triangles()) * 3);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 v = mesh.vertex(t, k);
      out[3 * t + k] = f(v.x, v.y);
    }
  }
  return out;
}

void set_field(const ColumnGrid& grid, Field& field, int f, const std::function<double(double, double, double)>& g) {
  const Mesh2D& mesh = grid.mesh();
  for (int c = 0; c < grid.num_columns(); ++c) {
    for (int l = 0; l < grid.layers(c); ++l) {
      for (int i = 0; i < 6; ++i) {
        const int h = i % 3;
        const Vec2 v = mesh.vertex(c, h);
        field.at(f, i, grid.prism_offset(c) + l) = g(v.x, v.y, grid.z(c, l + i / 3, h));
      }
    }
  }
}

namespace {

std::shared_ptr<const Mesh2D> basin(const ScenarioSpec& s, const BedFunction& bed) {
  if (!s.mesh_file.empty()) return std::make_shared<const Mesh2D>(hilbert_reorder(read_mesh_file(s.mesh_file)));
  return std::make_shared<const Mesh2D>(hilbert_reorder(generate_basin_mesh(s.nx, s.ny, s.lx, s.ly, bed)));
}

// Smooth random bathymetry: a few low-wavenumber modes around -depth.
BedFunction random_smooth_bed(const ScenarioSpec& s) {
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  struct Mode {
    double a, kx, ky, phase;
  };
  std::vector<Mode> modes;
  for (int i = 0; i < 4; ++i) {
    modes.push_back({coef(rng), 1.0 + i % 2, 1.0 + i / 2, std::numbers::pi * coef(rng)});
  }
  const double lx = s.lx, ly = s.ly, depth = s.depth;
  const double amp = 0.25 * depth;
  return [modes, lx, ly, depth, amp](double x, double y) {
    double b = -depth;
    for (const Mode& m : modes) {
      b += 0.25 * amp * m.a * std::cos(std::numbers::pi * m.kx * x / lx + m.phase) *
           std::cos(std::numbers::pi * m.ky * y / ly);
    }
    return b;
  };
}

}  // namespace

Scenario make_scenario(const ScenarioSpec& spec, const PhysParams& params) {
  Scenario sc;
  sc.params = params;
  sc.policy = LayerPolicy::uniform(spec.layers);
  const double depth = spec.depth;
  const double lx = spec.lx, ly = spec.ly, amp = spec.amplitude;
  const double t0 = params.eos_t0, s0 = params.eos_s0;

  if (spec.name == "lake_at_rest") {
    sc.mesh = basin(spec, random_smooth_bed(spec));
    sc.eta0.assign(static_cast<std::size_t>(sc.mesh->num_triangles()) * 3, 0.0);
    sc.init = [](Model&) {};
  } else if (spec.name == "standing_wave") {
    // Flat basin, first longitudinal mode.
    sc.mesh = basin(spec, [depth](double, double) { return -depth; });
    sc.eta0 = interpolate_2d(*sc.mesh, [=](double x, double) { return amp * std::cos(std::numbers::pi * x / lx); });
    sc.init = [](Model&) {};
  } else if (spec.name == "lock_exchange") {
    // Temperature step across the channel centre.
    sc.mesh = basin(spec, [depth](double, double) { return -depth; });
    sc.eta0.assign(static_cast<std::size_t>(sc.mesh->num_triangles()) * 3, 0.0);
    sc.init = [=](Model& m) {
      set_field(m.grid(), m.state().tracers, kTemperature,
                [=](double x, double, double) { return x < 0.5 * lx ? t0 + 5.0 : t0; });
    };
  } else if (spec.name == "wind_column") {
    // Wind over a gently sloping basin; wind stress comes from params.
    sc.mesh = basin(spec, [=](double x, double) { return -depth * (1.0 - 0.2 * x / lx); });
    sc.eta0.assign(static_cast<std::size_t>(sc.mesh->num_triangles()) * 3, 0.0);
    sc.init = [](Model&) {};
  } else if (spec.name == "uniform_advection") {
    // Constant tracers carried by a sloshing flow over a sloped bed.
    sc.mesh = basin(spec, [=](double x, double y) { return -depth * (1.0 - 0.3 * x / lx + 0.1 * y / ly); });
    sc.eta0 = interpolate_2d(*sc.mesh, [=](double x, double y) {
      return amp * std::exp(-20.0 * ((x / lx - 0.4) * (x / lx - 0.4) + (y / ly - 0.5) * (y / ly - 0.5)));
    });
    sc.init = [=](Model& m) {
      set_field(m.grid(), m.state().u, 0, [](double, double, double) { return 0.05; });
      set_field(m.grid(), m.state().u, 1, [](double, double, double) { return -0.02; });
      set_field(m.grid(), m.state().tracers, kTemperature, [=](double, double, double) { return t0 + 3.0; });
      set_field(m.grid(), m.state().tracers, kSalinity, [=](double, double, double) { return s0; });
    };
  } else {
    throw ConfigError("unknown scenario '" + spec.name + "'");
  }
  // Probe at the mesh node closest to the middle of the west wall.
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t < sc.mesh->num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 v = sc.mesh->vertex(t, k);
      const double d = v.x * v.x + (v.y - 0.5 * ly) * (v.y - 0.5 * ly);
      if (d < best) {
        best = d;
        sc.probe_tri = t;
        sc.probe_node = k;
      }
    }
  }
  return sc;
}

Model build_model(const Scenario& sc, const ModelOptions& options) {
  Model m(sc.mesh, sc.policy, sc.params, options, sc.eta0);
  if (sc.init) sc.init(m);
  m.sync_external_transport();
  return m;
}

}  // namespace prismdg
