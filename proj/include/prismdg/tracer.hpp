#pragma once

#include <span>

#include "prismdg/internal3d.hpp"

namespace prismdg {

// Tracer components: 0 temperature, 1 salinity.
inline constexpr int kTemperature = 0;
inline constexpr int kSalinity = 1;

struct TracerStep {
  const ColumnGrid* before = nullptr;  // mass of the start state
  const ColumnGrid* eval = nullptr;    // where fluxes are evaluated
  const ColumnGrid* motion = nullptr;  // end state, interface velocities
  double h = 0.0;
  bool implicit = true;
};

// Advances every tracer component with the consistent transport q-bar and
// its stabilization samples, the layer-crossing velocity w-tilde and the
// tracer diffusivities. `te` is the state the explicit terms see.
void step_tracer(const TracerStep& step, const PhysParams& p, const Field& t0, const Field& te,
                 const Field& qbar, std::span<const double> stab, const Field& wtilde, Field& t1,
                 std::span<const int> cols);

// Density anomaly from the linear equation of state at every node.
void apply_eos(const PhysParams& p, const Field& tracers, Field& density, std::span<const int> cols);

}  // namespace prismdg
