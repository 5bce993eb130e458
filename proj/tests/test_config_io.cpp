#include <doctest.h>

#include <cstring>
#include <limits>
#include <random>
#include <sstream>

#include "prismdg/config.hpp"
#include "prismdg/errors.hpp"
#include "prismdg/io.hpp"

using namespace prismdg;

namespace {

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_config(in, "case.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(
      "# standing wave\n"
      "scenario = standing_wave\n"
      "nx = 16   # trailing comment\n"
      "dt=30\n"
      "kappa_v = 1e-3\n"
      "momentum_advection = false\n"
      "mean_transport = step_end\n"
      "\n");
  const RunConfig c = parse_config(in);
  CHECK(c.scenario.name == "standing_wave");
  CHECK(c.scenario.nx == 16);
  CHECK(c.dt == 30.0);
  CHECK(c.physics.kappa_v == 1e-3);
  CHECK_FALSE(c.physics.momentum_advection);
  CHECK(c.physics.mean_transport == MeanTransport::StepEnd);
  CHECK(c.ranks == 1);
}

TEST_CASE("config errors name the key and line") {
  const std::string unknown = error_of("dt = 10\nwind_speed = 3\n");
  CHECK(unknown.find("wind_speed") != std::string::npos);
  CHECK(unknown.find("case.cfg") != std::string::npos);
  CHECK(unknown.find('2') != std::string::npos);
  CHECK(error_of("nx = twelve\n").find("nx") != std::string::npos);
  CHECK(error_of("dt = -1\n").find("dt") != std::string::npos);
  CHECK(error_of("ranks = 0\n").find("ranks") != std::string::npos);
  CHECK(error_of("no equals sign here\n") != "");
}

TEST_CASE("written configs parse back to the same values") {
  RunConfig c;
  c.scenario.name = "lock_exchange";
  c.scenario.lx = 1.0 / 3.0;
  c.scenario.seed = 12345;
  c.physics.coriolis = 1.0e-4 / 7.0;
  c.physics.wind_stress.start = {0.1, -0.2};
  c.dt = 0.1;
  c.end_time = 86400.0;
  c.ranks = 3;
  c.poison_ghosts = true;
  std::stringstream s;
  write_config(s, c);
  const RunConfig back = parse_config(s);
  std::stringstream again;
  write_config(again, back);
  CHECK(again.str() == s.str());
  CHECK(same_bits(back.scenario.lx, c.scenario.lx));
  CHECK(same_bits(back.physics.coriolis, c.physics.coriolis));
  CHECK(back.scenario.seed == 12345u);
  CHECK(back.poison_ghosts);
}

TEST_CASE("shortest decimal form round trips") {
  std::mt19937_64 rng(89);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t b = bits(rng);
    double x;
    std::memcpy(&x, &b, sizeof x);
    if (!std::isfinite(x)) continue;
    CHECK(same_bits(std::stod(format_double(x)), x));
  }
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("snapshots round trip bitwise") {
  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  SUBCASE("mixed layer counts") {
    FieldSoA<double> f(2, {3, 1, 4});
    for (double& x : f.data()) x = u(rng);
    f.data()[0] = -0.0;
    f.data()[1] = std::numeric_limits<double>::denorm_min();
    f.data()[2] = std::numeric_limits<double>::quiet_NaN();
    std::stringstream s(std::ios::in | std::ios::out | std::ios::binary);
    write_snapshot(s, "u", f, 1234.5);
    const Snapshot snap = read_snapshot(s);
    CHECK(snap.field == "u");
    CHECK(snap.components == 2);
    CHECK(snap.layers == std::vector<int>{3, 1, 4});
    CHECK(snap.time == 1234.5);
    const FieldSoA<double> back = snapshot_field(snap);
    CHECK(back.same_shape(f));
    CHECK(std::memcmp(back.data().data(), f.data().data(), f.data().size() * sizeof(double)) == 0);
  }
  SUBCASE("2D nodal field") {
    std::vector<double> eta(3 * 5);
    for (double& x : eta) x = u(rng);
    std::stringstream s(std::ios::in | std::ios::out | std::ios::binary);
    write_snapshot_2d(s, "eta", eta, 1, 60.0);
    const Snapshot snap = read_snapshot(s);
    CHECK(snap.columns == 5);
    CHECK(snap.layers.empty());
    CHECK(snap.data == eta);
  }
}

TEST_CASE("malformed snapshots are refused") {
  std::istringstream bad_magic("PRISMDG-SNAP 9 u 1 1 1 0\n");
  CHECK_THROWS_AS(read_snapshot(bad_magic), IoError);
  std::istringstream bad_layers("PRISMDG-SNAP 1 u 1 1 x 0\n");
  CHECK_THROWS_AS(read_snapshot(bad_layers), IoError);
  std::istringstream short_payload("PRISMDG-SNAP 1 u 1 1 1 0\n12345678");
  CHECK_THROWS_AS(read_snapshot(short_payload), IoError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_snapshot(empty), IoError);
}
