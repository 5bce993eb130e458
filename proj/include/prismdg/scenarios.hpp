#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "prismdg/column_grid.hpp"
#include "prismdg/model.hpp"
#include "prismdg/params.hpp"

namespace prismdg {

struct ScenarioSpec {
  std::string name = "lake_at_rest";
  int nx = 8;
  int ny = 8;
  double lx = 10000.0;
  double ly = 10000.0;
  double depth = 20.0;
  double amplitude = 0.1;  // initial elevation or bathymetry perturbation
  int layers = 4;
  unsigned seed = 1;
  std::string mesh_file;  // overrides the generated basin when set
};

struct Scenario {
  std::shared_ptr<const Mesh2D> mesh;
  LayerPolicy policy;
  PhysParams params;
  std::vector<double> eta0;
  // Fills u and tracers of a freshly built model.
  std::function<void(Model&)> init;
  // Probe triangle and local node for elevation time series.
  int probe_tri = 0;
  int probe_node = 0;
};

// Names accepted by make_scenario.
const std::vector<std::string>& scenario_names();

// Builds a scenario on a Hilbert-ordered mesh. `params` supplies the
// physics; scenarios only override what their setup requires (noted per
// scenario in the source). Throws ConfigError for unknown names.
Scenario make_scenario(const ScenarioSpec& spec, const PhysParams& params);

// Model built from a scenario with init applied and Q synced to u.
Model build_model(const Scenario& sc, const ModelOptions& options);

// Nodal P1 interpolant of f(x, y) on a triangle mesh, 3 values per triangle.
std::vector<double> interpolate_2d(const Mesh2D& mesh, const std::function<double(double, double)>& f);

// Sets component f of a prism field to g(x, y, z) at every node.
void set_field(const ColumnGrid& grid, Field& field, int f, const std::function<double(double, double, double)>& g);

}  // namespace prismdg
