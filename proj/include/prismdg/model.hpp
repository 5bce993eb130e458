#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "prismdg/column_grid.hpp"
#include "prismdg/exec.hpp"
#include "prismdg/external2d.hpp"
#include "prismdg/internal3d.hpp"
#include "prismdg/params.hpp"

namespace prismdg {

struct State3D {
  Field u;        // horizontal velocity, 2 components
  Field tracers;  // temperature, salinity
  Field wtilde;   // velocity across the moving layers, from the last stage
  double time = 0.0;
};

struct ModelOptions {
  int external_steps = 20;  // m: external steps per internal step
  int cell_width = 0;       // column solves batched in cells of this width; 0 = one column at a time
  bool check_consistency = false;
};

// Largest consistency defects seen so far (owned columns only).
struct ConsistencyRecord {
  double transport_rel = 0.0;  // |sum q-bar - Q-bar| / max |Q-bar|
  double wtilde_abs = 0.0;     // |column-summed w-tilde RHS - free-surface RHS|
  double wtilde_scale = 0.0;   // max |free-surface RHS| seen
  long checks = 0;
};

struct BudgetRow {
  double time = 0.0;
  std::string stage;
  double volume = 0.0;
  double momentum_x = 0.0;
  double momentum_y = 0.0;
  double tracer_mass = 0.0;
  double tracer_min = 0.0;
  double tracer_max = 0.0;
};

// Per-column budget contributions; summed in column order so the total
// does not depend on the partition.
struct ColumnBudget {
  double volume = 0.0;
  double momentum_x = 0.0;
  double momentum_y = 0.0;
  double tracer_mass = 0.0;
  double tracer_min = 0.0;
  double tracer_max = 0.0;
};

void column_budget(const ColumnGrid& grid, const Field& u, const Field& tracers, std::span<const int> cols,
                   std::vector<ColumnBudget>& out);
BudgetRow reduce_budget(const std::vector<ColumnBudget>& cols, double time, const std::string& stage);

// Coupled external/internal model advanced with a two-stage IMEX step:
// a half step with implicit vertical terms, then a full step from the
// start state with every term evaluated at the half-step state.
class Model {
 public:
  Model(std::shared_ptr<const Mesh2D> mesh, const LayerPolicy& policy, PhysParams params, ModelOptions options,
        const std::vector<double>& eta0);

  State3D& state() { return state_; }
  const State3D& state() const { return state_; }
  State2D& external() { return ext_state_; }
  const State2D& external() const { return ext_state_; }
  const ColumnGrid& grid() const { return grid_; }
  const External2D& external_mode() const { return ext_; }
  const PhysParams& params() const { return params_; }
  const ModelOptions& options() const { return options_; }
  const ConsistencyRecord& consistency() const { return consistency_; }

  // Q <- vertical sum of the projected Jz u, for every column.
  void sync_external_transport();

  // One internal step of length dt.
  void step(double dt, Executor& exec);

  // Called on every worker after each stage ("half", "full") with the
  // stage end state.
  using StageHook = std::function<void(const std::string& stage, double time, const ColumnGrid& grid,
                                       const Field& u, const Field& tracers)>;
  void set_stage_hook(StageHook hook) { hook_ = std::move(hook); }

  // Budget of the current state over all columns (serial use).
  BudgetRow budget(const std::string& stage) const;

  // True vertical velocity diagnosed from the current state.
  Field diagnose_w() const;

  // Static count of halo exchanges in one internal step.
  static long exchanges_per_step(int m);

 private:
  struct StageEval {
    const ColumnGrid* grid;
    const Field* u;
    const Field* tracers;
    const State2D* ext;
    double time;
  };
  struct StageOut {
    ColumnGrid grid;
    Field u;
    Field tracers;
    State2D ext;
  };

  StageOut stage(const StageEval& e, double h, int substeps, bool implicit, Executor& exec);
  void check_consistency(const ColumnGrid& grid, const Field& qbar, const SubcycleResult& sub,
                         std::span<const int> cols);

  std::shared_ptr<const Mesh2D> mesh_;
  PhysParams params_;
  ModelOptions options_;
  External2D ext_;
  ColumnGrid grid_;
  State3D state_;
  State2D ext_state_;
  ConsistencyRecord consistency_;
  StageHook hook_;
};

}  // namespace prismdg
