#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dwave/errors.hpp"
#include "dwave/scenario.hpp"

using namespace dwave;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const char* kSmall =
    "system = boundary\n"
    "mesh.n = 30\n"
    "gamma1 = right\n"
    "m_rho = 10\n"
    "y0.kind = gaussian:0.5:0:0.1\n"
    "z0.kind = constant:1\n"
    "t_end = 15\n"
    "analyses = decay_fit,equilibrium,spectrum,resolvent_sweep\n"
    "sweep.points = 8\n";

fs::path scratch(const char* name) {
  const fs::path p = fs::temp_directory_path() / ("dwave_test_" + std::string(name));
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("minimal config gets defaults") {
  const Scenario s = parse_scenario("system = boundary\nmesh.n = 50\n");
  CHECK(s.xi == doctest::Approx(s.boundary.tau * s.boundary.alpha));
  CHECK(s.boundary.xi == s.xi);
  CHECK(s.boundary.varpi > 0.0);
  CHECK(s.boundary.delta_w == s.boundary.beta);
  CHECK(s.dt > 0.0);
}

TEST_CASE("xi on the window edge is rejected with the inequality") {
  try {
    parse_scenario("system = boundary\nalpha = 2\nbeta = 1\ntau = 0.5\nxi = 0.5\n");
    FAIL("expected ParameterError");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("xi must exceed tau*beta") != std::string::npos);
  }
}

TEST_CASE("unknown key reports the line number") {
  try {
    parse_scenario("system = boundary\n# comment\nalpah = 2\n");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(std::string(e.what()).find("alpah") != std::string::npos);
  }
}

TEST_CASE("malformed lines and values") {
  CHECK_THROWS_AS(parse_scenario("system boundary\n"), InputError);
  CHECK_THROWS_AS(parse_scenario("mesh.n = ten\n"), InputError);
  CHECK_THROWS_AS(parse_scenario("y0.kind = wobble\n"), InputError);
  CHECK_THROWS_AS(parse_scenario("analyses = decay_fit,magic\n"), InputError);
  CHECK_THROWS_AS(parse_scenario("preset = nope\n"), InputError);
  CHECK_THROWS_AS(parse_scenario("system = internal\nmesh.dim = 2\ngamma1 = none\nanalyses = spectrum\n"),
                  InputError);
}

TEST_CASE("trapped-square preset") {
  const Scenario s = preset_scenario("trapped-square");
  CHECK(s.system == SystemKind::Internal);
  CHECK(s.mesh_dim == 2);
  CHECK(s.mesh_lx == 1.0);
  CHECK(s.mesh_ly == 1.0);
  CHECK(s.a_kind == "strip");
  CHECK(s.a_eps == doctest::Approx(0.2));
  CHECK(s.a_amplitude == 1.0);
  CHECK(s.b_scale == doctest::Approx(0.1));
  CHECK(preset_scenario("trapped-square-undelayed").b_scale == 0.0);
  CHECK_FALSE(preset_scenario("trapped-square-undelayed").delayed());
}

TEST_CASE("later keys override the preset") {
  const Scenario s = parse_scenario("mesh.n = 20\npreset = trapped-square\n");
  CHECK(s.mesh_n == 20);
  CHECK(s.system == SystemKind::Internal);
}

TEST_CASE("formatted scenario parses back to the same scenario") {
  const Scenario s = preset_scenario("boundary-1d-exp");
  std::string text = format_scenario(s);
  Scenario t = parse_scenario(text);
  t.preset = s.preset;
  CHECK(format_scenario(t) == text);
}

TEST_CASE("profiles") {
  const Profile p = parse_profile("gaussian:0.3:0.5:0.05");
  CHECK(p.kind == "gaussian");
  REQUIRE(p.args.size() == 3);
  CHECK(p.args[2] == 0.05);
  CHECK(to_string(parse_profile("mode:2:1")) == "mode:2:1");
}

TEST_CASE("end-to-end boundary run writes outputs and is deterministic") {
  const Scenario s = parse_scenario(kSmall);
  const fs::path a = scratch("a"), b = scratch("b");
  REQUIRE(run_scenario(s, a) == 0);
  REQUIRE(run_scenario(s, b) == 0);
  for (const char* f : {"trackers.csv", "fits.csv", "spectrum.csv", "sweep.csv", "summary.txt"}) {
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const std::string fits = slurp(a / "fits.csv");
  CHECK(fits.rfind("model,C,rate,r2,t_min,t_max\n", 0) == 0);
  CHECK(fits.find("\nexponential,") != std::string::npos);
  CHECK(slurp(a / "trackers.csv").rfind("t,g_norm,Q,dist_eq,diss_lhs,diss_rhs\n", 0) == 0);
  CHECK(slurp(a / "summary.txt").find("FAIL") == std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("exponential row has positive rate") {
  Scenario s = parse_scenario(kSmall);
  s.analyses = {"decay_fit"};
  const fs::path a = scratch("c");
  REQUIRE(run_scenario(s, a) == 0);
  std::istringstream in(slurp(a / "fits.csv"));
  std::string line;
  bool seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("exponential,", 0) != 0) continue;
    seen = true;
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    std::getline(cells, cell, ',');
    std::getline(cells, cell, ',');
    CHECK(std::stod(cell) > 0.0);
  }
  CHECK(seen);
  fs::remove_all(a);
}

TEST_CASE("small internal runs report a polynomial fit") {
  for (const char* preset : {"trapped-square", "trapped-square-undelayed"}) {
    Scenario s = parse_scenario(std::string("preset = ") + preset + "\nmesh.n = 10\nt_end = 40\nfit.t_min = 4\nfit.t_max = 40\n");
    const fs::path a = scratch("d");
    CHECK(run_scenario(s, a) == 0);
    CHECK(slurp(a / "fits.csv").find("polynomial,") != std::string::npos);
    fs::remove_all(a);
  }
}

TEST_CASE("unwritable output is an I/O error") {
  const Scenario s = parse_scenario(kSmall);
  const fs::path file = scratch("e");
  { std::ofstream(file.string()) << "x"; }
  CHECK(run_scenario(s, file / "sub") == 1);
  fs::remove(file);
}

}
