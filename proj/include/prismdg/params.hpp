#pragma once

#include "prismdg/reference.hpp"
#include "prismdg/vec.hpp"

namespace prismdg {

// Value varying linearly between two states one interval apart.
template <class T>
struct LinearInTime {
  T start{};
  T end{};
  double t0 = 0.0;
  double interval = 0.0;  // <= 0: constant `start`

  T at(double t) const {
    if (!(interval > 0.0)) return start;
    const double a = (t - t0) / interval;
    return start + a * (end - start);
  }
};

enum class MeanTransport {
  // RK-stage weights (1/6, 1/6, 2/3) per external step: the transport whose
  // divergence the external mode actually integrated.
  StageWeighted,
  // Post-step values, one sample per external step.
  StepEnd,
};

struct PhysParams {
  double g = 9.81;
  double rho0 = 1025.0;
  double coriolis = 0.0;  // f, 1/s
  double drag_cd = 0.0;   // quadratic bottom drag coefficient
  LinearInTime<Vec2> wind_stress;  // N/m^2, spatially uniform
  double kappa_h = 0.0;   // horizontal viscosity, m^2/s
  double kappa_v = 0.0;   // vertical viscosity, m^2/s
  double nu_h = 0.0;      // horizontal tracer diffusivity
  double nu_v = 0.0;      // vertical tracer diffusivity
  double eos_alpha = 0.2;  // kg/m^3/K
  double eos_beta = 0.78;  // kg/m^3/psu
  double eos_t0 = 10.0;
  double eos_s0 = 35.0;
  PenaltyParams penalty;
  bool momentum_advection = true;
  MeanTransport mean_transport = MeanTransport::StageWeighted;
  double cfl_limit = 1.0 / 3.0;
  LinearInTime<double> open_eta;  // prescribed elevation on Open edges
};

// Linear equation of state for the density anomaly.
inline double eos_density(const PhysParams& p, double temperature, double salinity) {
  return -p.eos_alpha * (temperature - p.eos_t0) + p.eos_beta * (salinity - p.eos_s0);
}

}  // namespace prismdg
