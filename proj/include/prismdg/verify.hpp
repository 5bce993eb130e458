#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prismdg {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Acceptance checks, one per criterion id (1..12).
CriterionResult check_column_oracles();       // 1
CriterionResult check_banded_solver();        // 2
CriterionResult check_well_balanced();        // 3
CriterionResult check_tracer_constancy();     // 4
CriterionResult check_tracer_mass();          // 5
CriterionResult check_consistency();          // 6
CriterionResult check_standing_wave();        // 7
CriterionResult check_temporal_order();       // 8
CriterionResult check_partition_invariance(); // 9
CriterionResult check_layout();               // 10
CriterionResult check_constant_density_hpg(); // 11
CriterionResult check_amdahl();               // 12

struct Check {
  int id;
  CriterionResult (*run)();
};

struct Suite {
  std::string name;
  std::vector<Check> checks;
};

// oracles, conservation, consistency, convergence, partition, layout,
// scaling, and "all" (every criterion in id order).
const std::vector<Suite>& suites();
// Throws ConfigError for an unknown suite name.
const Suite& find_suite(const std::string& name);

// Runs the checks, printing one line per criterion as it finishes.
std::vector<CriterionResult> run_suite(const Suite& suite, std::ostream& log);

void write_report_csv(std::ostream& out, const std::vector<CriterionResult>& results);

}  // namespace prismdg
