#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "prismdg/config.hpp"
#include "prismdg/model.hpp"
#include "prismdg/scenarios.hpp"

namespace prismdg {

struct PhaseTiming {
  int step = 0;
  int rank = 0;
  std::string phase;
  double micros = 0.0;
};

struct RunOptions {
  double dt = 60.0;
  int steps = 1;
  int ranks = 1;
  bool poison = false;
  int budget_interval = 0;  // 0: no budget rows
  // Called on rank 0 every `snapshot_interval` steps with the gathered state.
  int snapshot_interval = 0;
  std::function<void(int step, const State3D&, const State2D&)> on_snapshot;
};

struct RunResult {
  State3D state;
  State2D external;
  long exchanges = 0;  // per rank (identical on every rank)
  std::vector<BudgetRow> budget;
  std::vector<PhaseTiming> timings;
  ConsistencyRecord consistency;  // worst over ranks
  double loop_seconds = 0.0;      // wall time of the step loop on rank 0
};

// Runs `steps` internal steps of a scenario on `ranks` in-process workers
// and gathers the owned values of every rank into one state.
RunResult run_scenario(const Scenario& sc, const ModelOptions& options, const RunOptions& run);

// The `run` subcommand: writes the run header, budget CSV, probe CSV,
// snapshots and phase timings to cfg.output_dir.
void run_config(const RunConfig& cfg, std::ostream& log);

}  // namespace prismdg
