#include "prismdg/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "prismdg/errors.hpp"

namespace prismdg {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw std::invalid_argument("not a number: " + v);
  return x;
}

int to_int(const std::string& v) {
  int x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw std::invalid_argument("not an integer: " + v);
  return x;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("not a boolean: " + v);
}

std::string fmt(double x) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

struct Key {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define REAL_KEY(name, field) \
  {name, {[](RunConfig& c, const std::string& v) { c.field = to_double(v); }, [](const RunConfig& c) { return fmt(c.field); }}}
#define INT_KEY(name, field) \
  {name, {[](RunConfig& c, const std::string& v) { c.field = to_int(v); }, [](const RunConfig& c) { return std::to_string(c.field); }}}

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> table = {
      {"scenario", {[](RunConfig& c, const std::string& v) { c.scenario.name = v; },
                    [](const RunConfig& c) { return c.scenario.name; }}},
      {"mesh_file", {[](RunConfig& c, const std::string& v) { c.scenario.mesh_file = v; },
                     [](const RunConfig& c) { return c.scenario.mesh_file; }}},
      INT_KEY("nx", scenario.nx),
      INT_KEY("ny", scenario.ny),
      REAL_KEY("lx", scenario.lx),
      REAL_KEY("ly", scenario.ly),
      REAL_KEY("depth", scenario.depth),
      REAL_KEY("amplitude", scenario.amplitude),
      {"seed", {[](RunConfig& c, const std::string& v) { c.scenario.seed = static_cast<unsigned>(to_int(v)); },
                [](const RunConfig& c) { return std::to_string(c.scenario.seed); }}},
      INT_KEY("layers", scenario.layers),
      REAL_KEY("dt", dt),
      INT_KEY("external_steps", external_steps),
      REAL_KEY("end_time", end_time),
      REAL_KEY("g", physics.g),
      REAL_KEY("rho0", physics.rho0),
      REAL_KEY("coriolis", physics.coriolis),
      REAL_KEY("drag_cd", physics.drag_cd),
      REAL_KEY("wind_x", physics.wind_stress.start.x),
      REAL_KEY("wind_y", physics.wind_stress.start.y),
      REAL_KEY("wind_end_x", physics.wind_stress.end.x),
      REAL_KEY("wind_end_y", physics.wind_stress.end.y),
      {"forcing_interval", {[](RunConfig& c, const std::string& v) {
                              c.physics.wind_stress.interval = to_double(v);
                              c.physics.open_eta.interval = to_double(v);
                            },
                            [](const RunConfig& c) { return fmt(c.physics.wind_stress.interval); }}},
      REAL_KEY("open_eta", physics.open_eta.start),
      REAL_KEY("open_eta_end", physics.open_eta.end),
      REAL_KEY("kappa_h", physics.kappa_h),
      REAL_KEY("kappa_v", physics.kappa_v),
      REAL_KEY("nu_h", physics.nu_h),
      REAL_KEY("nu_v", physics.nu_v),
      REAL_KEY("eos_alpha", physics.eos_alpha),
      REAL_KEY("eos_beta", physics.eos_beta),
      REAL_KEY("eos_t0", physics.eos_t0),
      REAL_KEY("eos_s0", physics.eos_s0),
      REAL_KEY("penalty_n0", physics.penalty.n0),
      REAL_KEY("cfl_limit", physics.cfl_limit),
      {"momentum_advection", {[](RunConfig& c, const std::string& v) { c.physics.momentum_advection = to_bool(v); },
                              [](const RunConfig& c) { return std::string(c.physics.momentum_advection ? "true" : "false"); }}},
      {"mean_transport", {[](RunConfig& c, const std::string& v) {
                            if (v == "stage_weighted") {
                              c.physics.mean_transport = MeanTransport::StageWeighted;
                            } else if (v == "step_end") {
                              c.physics.mean_transport = MeanTransport::StepEnd;
                            } else {
                              throw std::invalid_argument("expected stage_weighted or step_end");
                            }
                          },
                          [](const RunConfig& c) {
                            return std::string(c.physics.mean_transport == MeanTransport::StageWeighted ? "stage_weighted"
                                                                                                    : "step_end");
                          }}},
      {"precision", {[](RunConfig& c, const std::string& v) {
                       if (v == "fp32") {
                         c.precision = Precision::Fp32;
                       } else if (v == "fp64") {
                         c.precision = Precision::Fp64;
                       } else {
                         throw std::invalid_argument("expected fp32 or fp64");
                       }
                     },
                     [](const RunConfig& c) { return std::string(c.precision == Precision::Fp32 ? "fp32" : "fp64"); }}},
      INT_KEY("ranks", ranks),
      INT_KEY("cell_width", cell_width),
      INT_KEY("output_interval", output_interval),
      {"output_dir", {[](RunConfig& c, const std::string& v) { c.output_dir = v; },
                      [](const RunConfig& c) { return c.output_dir; }}},
      {"poison_ghosts", {[](RunConfig& c, const std::string& v) { c.poison_ghosts = to_bool(v); },
                         [](const RunConfig& c) { return std::string(c.poison_ghosts ? "true" : "false"); }}},
  };
  return table;
}

#undef REAL_KEY
#undef INT_KEY

void validate(const RunConfig& c, const std::string& source) {
  auto fail = [&](const std::string& msg) { throw ConfigError(source + ": " + msg); };
  if (!(c.dt > 0.0)) fail("dt must be positive");
  if (c.external_steps < 1) fail("external_steps must be at least 1");
  if (!(c.end_time >= 0.0)) fail("end_time must be non-negative");
  if (c.ranks < 1) fail("ranks must be at least 1");
  if (c.cell_width < 0) fail("cell_width must be non-negative");
  if (c.output_interval < 1) fail("output_interval must be at least 1");
  if (c.scenario.layers < 1) fail("layers must be at least 1");
  if (c.scenario.mesh_file.empty() && (c.scenario.nx < 1 || c.scenario.ny < 1)) fail("nx and ny must be at least 1");
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = keys().find(key);
    if (it == keys().end()) throw ConfigError(where + ": unknown key '" + key + "'");
    try {
      it->second.set(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": bad value for '" + key + "': " + e.what());
    }
  }
  validate(cfg, source);
  return cfg;
}

RunConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  return parse_config(in, path);
}

void write_config(std::ostream& out, const RunConfig& cfg) {
  for (const auto& [name, key] : keys()) out << name << " = " << key.get(cfg) << "\n";
}

}  // namespace prismdg
