#include "prismdg/tracer.hpp"

#include "prismdg/momentum.hpp"

namespace prismdg {

void step_tracer(const TracerStep& step, const PhysParams& p, const Field& t0, const Field& te,
                 const Field& qbar, std::span<const double> stab, const Field& wtilde, Field& t1,
                 std::span<const int> cols) {
  const ColumnGrid& eval = *step.eval;
  Field residual(te.components(), te.layer_counts());
  add_horizontal_advection(eval, te, qbar, stab, residual, cols);
  add_horizontal_diffusion(eval, p.nu_h, p.penalty, te, residual, cols);
  VerticalCoefficients vc;
  vc.kh = p.nu_h;
  vc.kv = p.nu_v;
  vc.penalty = p.penalty;
  advance_vertical(*step.before, eval, *step.motion, wtilde, vc, step.h, step.implicit, t0, te, residual, t1,
                   cols);
}

void apply_eos(const PhysParams& p, const Field& tracers, Field& density, std::span<const int> cols) {
  for (int c : cols) {
    for (int l = 0; l < tracers.layers(c); ++l) {
      const int pr = tracers.offset(c) + l;
      for (int i = 0; i < 6; ++i) {
        const double s = tracers.components() > kSalinity ? tracers.at(kSalinity, i, pr) : p.eos_s0;
        density.at(0, i, pr) = eos_density(p, tracers.at(kTemperature, i, pr), s);
      }
    }
  }
}

}  // namespace prismdg
