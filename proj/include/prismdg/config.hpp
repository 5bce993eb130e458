#pragma once

#include <iosfwd>
#include <string>

#include "prismdg/params.hpp"
#include "prismdg/scenarios.hpp"

namespace prismdg {

enum class Precision { Fp32, Fp64 };

struct RunConfig {
  ScenarioSpec scenario;
  PhysParams physics;
  double dt = 60.0;
  int external_steps = 20;
  double end_time = 3600.0;
  Precision precision = Precision::Fp64;
  int ranks = 1;
  int cell_width = 0;
  int output_interval = 10;  // internal steps between snapshots and budget rows
  std::string output_dir = "out";
  bool poison_ghosts = false;
};

// Flat `key = value` lines, `#` starts a comment. Unknown keys, malformed
// values and violated bounds throw ConfigError naming the source and line.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig read_config_file(const std::string& path);

// Every key with a value that parses back to the same bits.
void write_config(std::ostream& out, const RunConfig& cfg);

}  // namespace prismdg
