#include "prismdg/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "prismdg/errors.hpp"
#include "prismdg/momentum.hpp"
#include "prismdg/tracer.hpp"

namespace prismdg {

namespace {

std::vector<int> iota_vector(int n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

void column_budget(const ColumnGrid& grid, const Field& u, const Field& tracers, std::span<const int> cols,
                   std::vector<ColumnBudget>& out) {
  out.resize(grid.num_columns());
  for (int c : cols) {
    ColumnBudget b;
    b.tracer_min = std::numeric_limits<double>::infinity();
    b.tracer_max = -std::numeric_limits<double>::infinity();
    for (int l = 0; l < grid.layers(c); ++l) {
      const int pr = grid.prism_offset(c) + l;
      const PrismGeom geo = prism_geom(grid, pr);
      const auto m = prism_mass(geo);
      for (int i = 0; i < 6; ++i) {
        double row = 0.0, ux = 0.0, uy = 0.0, tm = 0.0;
        for (int j = 0; j < 6; ++j) {
          row += m[i * 6 + j];
          ux += m[i * 6 + j] * u.at(0, j, pr);
          uy += m[i * 6 + j] * u.at(1, j, pr);
          tm += m[i * 6 + j] * tracers.at(0, j, pr);
        }
        b.volume += row;
        b.momentum_x += ux;
        b.momentum_y += uy;
        b.tracer_mass += tm;
        b.tracer_min = std::min(b.tracer_min, tracers.at(0, i, pr));
        b.tracer_max = std::max(b.tracer_max, tracers.at(0, i, pr));
      }
    }
    out[c] = b;
  }
}

BudgetRow reduce_budget(const std::vector<ColumnBudget>& cols, double time, const std::string& stage) {
  BudgetRow r;
  r.time = time;
  r.stage = stage;
  r.tracer_min = std::numeric_limits<double>::infinity();
  r.tracer_max = -std::numeric_limits<double>::infinity();
  for (const ColumnBudget& b : cols) {
    r.volume += b.volume;
    r.momentum_x += b.momentum_x;
    r.momentum_y += b.momentum_y;
    r.tracer_mass += b.tracer_mass;
    r.tracer_min = std::min(r.tracer_min, b.tracer_min);
    r.tracer_max = std::max(r.tracer_max, b.tracer_max);
  }
  return r;
}

Model::Model(std::shared_ptr<const Mesh2D> mesh, const LayerPolicy& policy, PhysParams params,
             ModelOptions options, const std::vector<double>& eta0)
    : mesh_(mesh), params_(params), options_(options), ext_(mesh, params) {
  if (options_.external_steps < 1) throw ConfigError("external_steps must be at least 1");
  grid_ = extrude(mesh_, policy, eta0);
  grid_.require_conforming();
  state_.u = Field(2, grid_.layer_counts());
  state_.tracers = Field(2, grid_.layer_counts());
  state_.wtilde = Field(1, grid_.layer_counts());
  for (int f = 0; f < 2; ++f) {
    const double v = f == kTemperature ? params_.eos_t0 : params_.eos_s0;
    for (int c = 0; c < grid_.num_columns(); ++c) {
      for (int l = 0; l < grid_.layers(c); ++l) {
        for (int i = 0; i < 6; ++i) state_.tracers.at(f, i, grid_.prism_offset(c) + l) = v;
      }
    }
  }
  ext_state_ = State2D::at_rest(*mesh_);
  ext_state_.eta = eta0;
}

void Model::sync_external_transport() {
  const std::vector<int> all = iota_vector(grid_.num_columns());
  Field q(2, grid_.layer_counts());
  project_transport(grid_, state_.u, q, all);
  ext_state_.transport = vertical_sum(q, all, grid_.num_columns());
}

long Model::exchanges_per_step(int m) {
  const int half = (m + 1) / 2;
  return 3L * half + 2 + 3L * m + 2;
}

void Model::step(double dt, Executor& exec) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const int m = options_.external_steps;
  const double t0 = state_.time;

  const StageEval first{&grid_, &state_.u, &state_.tracers, &ext_state_, t0};
  StageOut half = stage(first, 0.5 * dt, (m + 1) / 2, true, exec);
  if (hook_) hook_("half", t0 + 0.5 * dt, half.grid, half.u, half.tracers);

  const StageEval second{&half.grid, &half.u, &half.tracers, &half.ext, t0 + 0.5 * dt};
  StageOut full = stage(second, dt, m, false, exec);

  grid_ = std::move(full.grid);
  state_.u = std::move(full.u);
  state_.tracers = std::move(full.tracers);
  ext_state_ = std::move(full.ext);
  ext_state_.f3d.clear();
  state_.time = t0 + dt;
  ext_state_.time = state_.time;
  if (hook_) hook_("full", state_.time, grid_, state_.u, state_.tracers);
}

Model::StageOut Model::stage(const StageEval& e, double h, int substeps, bool implicit, Executor& exec) {
  const ColumnGrid& eval = *e.grid;
  const std::span<const int> owned = exec.owned();
  const std::span<const int> local = exec.local();
  const auto& layers = grid_.layer_counts();

  // Pressure gradient from the density anomaly.
  Field density(1, layers);
  apply_eos(params_, *e.tracers, density, local);
  Field r(2, layers);
  compute_r_rhs(eval, params_, density, r, owned);
  solve_columns(ColumnSystemKind::Dvu, eval, r, owned, options_.cell_width);

  // Predicted transport, stabilization at the evaluation elevation, and the
  // 3D forcing of the external mode.
  Field q(2, layers);
  project_transport(eval, *e.u, q, local);
  std::vector<double> residual, stab;
  ext_.rhs_free_surface(*e.ext, residual, &stab, owned);
  Field f3dh(2, layers);
  compute_f3dh(eval, params_, *e.u, q, stab, r, f3dh, owned);
  const Stresses st = compute_stresses(eval, params_, *e.u, e.time, owned);

  StageOut out;
  out.ext = ext_state_;
  f3d_to_2d(eval, f3dh, st, owned, out.ext.f3d);
  SubcycleResult sub = ext_.subcycle(out.ext, substeps, h / substeps, exec);
  exec.exchange({HaloField::flat(&sub.mean_transport.data()->x, 6), HaloField::flat(sub.mean_stab.data(), kEdgeSamples)});

  // New mesh, consistent transport and the layer-crossing velocity.
  out.grid = update_moving_mesh(grid_, out.ext.eta, h, local);
  Field qbar(2, layers);
  build_consistent_transport(eval, q, sub.mean_transport, qbar, local);
  state_.wtilde = Field(1, layers);
  compute_wtilde_rhs(eval, qbar, sub.mean_stab, state_.wtilde, owned);
  if (options_.check_consistency) check_consistency(eval, qbar, sub, owned);
  solve_columns(ColumnSystemKind::Dvd, eval, state_.wtilde, owned, options_.cell_width);

  // Momentum.
  Field mom(2, layers);
  compute_f3dh(eval, params_, *e.u, qbar, sub.mean_stab, r, mom, owned);
  add_stress_loads(eval, st, mom, owned);
  add_depth_mean_forcing(eval, sub.f2d, mom, owned);
  VerticalCoefficients vc;
  vc.kh = params_.kappa_h;
  vc.kv = params_.kappa_v;
  vc.penalty = params_.penalty;
  vc.advection = params_.momentum_advection;
  out.u = state_.u;
  advance_vertical(grid_, eval, out.grid, state_.wtilde, vc, h, implicit, state_.u, *e.u, mom, out.u, owned);

  // Tracers.
  out.tracers = state_.tracers;
  const TracerStep ts{&grid_, &eval, &out.grid, h, implicit};
  step_tracer(ts, params_, state_.tracers, *e.tracers, qbar, sub.mean_stab, state_.wtilde, out.tracers, owned);

  exec.exchange({HaloField::soa(out.u), HaloField::soa(out.tracers)});
  return out;
}

void Model::check_consistency(const ColumnGrid& grid, const Field& qbar, const SubcycleResult& sub,
                              std::span<const int> cols) {
  const std::vector<Vec2> sum = vertical_sum(qbar, cols, grid.num_columns());
  double qmax = 0.0, qerr = 0.0;
  for (int c : cols) {
    for (int h = 0; h < 3; ++h) {
      const Vec2 d = sum[3 * c + h] - sub.mean_transport[3 * c + h];
      qerr = std::max(qerr, norm(d));
      qmax = std::max(qmax, norm(sub.mean_transport[3 * c + h]));
    }
  }
  consistency_.transport_rel = std::max(consistency_.transport_rel, qmax > 0.0 ? qerr / qmax : qerr);

  std::vector<double> rhs2d;
  ext_.rhs_free_surface_from(sub.mean_transport, sub.mean_stab, rhs2d);
  for (int c : cols) {
    double col[3] = {0.0, 0.0, 0.0};
    for (int l = 0; l < grid.layers(c); ++l) {
      for (int i = 0; i < 6; ++i) col[i % 3] += state_.wtilde.at(0, i, grid.prism_offset(c) + l);
    }
    for (int h = 0; h < 3; ++h) {
      consistency_.wtilde_abs = std::max(consistency_.wtilde_abs, std::abs(col[h] - rhs2d[3 * c + h]));
      consistency_.wtilde_scale = std::max(consistency_.wtilde_scale, std::abs(rhs2d[3 * c + h]));
    }
  }
  ++consistency_.checks;
}

BudgetRow Model::budget(const std::string& stage) const {
  std::vector<ColumnBudget> cols;
  column_budget(grid_, state_.u, state_.tracers, iota_vector(grid_.num_columns()), cols);
  return reduce_budget(cols, state_.time, stage);
}

Field Model::diagnose_w() const {
  const std::vector<int> all = iota_vector(grid_.num_columns());
  Field q(2, grid_.layer_counts());
  project_transport(grid_, state_.u, q, all);
  std::vector<double> residual, stab;
  ext_.rhs_free_surface(ext_state_, residual, &stab);
  Field w(1, grid_.layer_counts());
  compute_w_rhs(grid_, q, stab, w, all);
  solve_columns(ColumnSystemKind::Dvd, grid_, w, all, 0);
  return w;
}

}  // namespace prismdg
