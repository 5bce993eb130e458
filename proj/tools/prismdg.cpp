#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "prismdg/bench.hpp"
#include "prismdg/config.hpp"
#include "prismdg/errors.hpp"
#include "prismdg/run.hpp"
#include "prismdg/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitError = 2;

// PRISMDG_OUTPUT_DIR wins over the config file and the command line.
std::string output_dir(const std::string& fallback) {
  const char* env = std::getenv("PRISMDG_OUTPUT_DIR");
  return env && *env ? std::string(env) : fallback;
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path);
  if (!out) throw prismdg::IoError("cannot write " + path.string());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prismdg: coupled 2D/3D prism DG ocean model"};
  app.require_subcommand(1);

  std::string config_path;
  int ranks = 0;
  auto* run = app.add_subcommand("run", "advance a configured scenario to its end time");
  run->add_option("--config", config_path, "key = value configuration file")->required();
  run->add_option("--ranks", ranks, "override the configured rank count")->check(CLI::PositiveNumber);

  std::string suite;
  std::string verify_dir = "out";
  auto* verify = app.add_subcommand("verify", "run an acceptance suite and write a pass/fail CSV");
  verify->add_option("suite", suite, "oracles|conservation|consistency|convergence|partition|layout|scaling|all")
      ->required();
  verify->add_option("--output-dir", verify_dir, "directory for verify_<suite>.csv");

  std::string kind;
  std::string bench_dir = "out";
  int columns = 1000, layers = 32;
  std::vector<int> bench_ranks = {1, 2, 4};
  auto* bench = app.add_subcommand("bench", "layout transposition or rank scaling measurements");
  bench->add_option("kind", kind, "layout|scaling")->required()->check(CLI::IsMember({"layout", "scaling"}));
  bench->add_option("--output-dir", bench_dir, "directory for bench_<kind>.csv");
  bench->add_option("--columns", columns, "layout bench column count");
  bench->add_option("--layers", layers, "layers per column");
  bench->add_option("--ranks", bench_ranks, "scaling bench rank counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*run) {
      prismdg::RunConfig cfg = prismdg::read_config_file(config_path);
      if (ranks > 0) cfg.ranks = ranks;
      cfg.output_dir = output_dir(cfg.output_dir);
      prismdg::run_config(cfg, std::cout);
      return kExitOk;
    }
    if (*verify) {
      const prismdg::Suite& s = prismdg::find_suite(suite);
      const auto results = prismdg::run_suite(s, std::cout);
      auto csv = open_output(output_dir(verify_dir), "verify_" + suite + ".csv");
      prismdg::write_report_csv(csv, results);
      bool ok = true;
      for (const auto& r : results) ok = ok && r.pass;
      std::cout << (ok ? "suite passed" : "suite FAILED") << '\n';
      return ok ? kExitOk : kExitFailed;
    }
    if (*bench) {
      auto csv = open_output(output_dir(bench_dir), "bench_" + kind + ".csv");
      if (kind == "layout") {
        prismdg::LayoutBenchOptions o;
        o.columns = columns;
        o.layers = layers;
        const auto rows = prismdg::layout_bench(o);
        prismdg::write_layout_csv(std::cout, rows);
        prismdg::write_layout_csv(csv, rows);
      } else {
        prismdg::ScalingOptions o;
        o.ranks = bench_ranks;
        o.layers = layers;
        const auto report = prismdg::scaling_bench(o);
        prismdg::write_scaling_csv(std::cout, report);
        prismdg::write_scaling_csv(csv, report);
      }
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
