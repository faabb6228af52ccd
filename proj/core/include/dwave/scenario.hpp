#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dwave/params.hpp"

namespace dwave {

enum class SystemKind { Boundary, Internal };

/// Initial profile: "zero", "constant:c", "gaussian[:cx[:cy[:width]]]",
/// "mode:kx[:ky]", "random" (seeded standard normal per node).
struct Profile {
  std::string kind = "zero";
  std::vector<double> args;
};

Profile parse_profile(std::string_view text);
std::string to_string(const Profile& p);

/// Fully resolved experiment description. Every default is filled in by
/// parse_scenario, so the struct can be run as is.
struct Scenario {
  std::string preset;
  SystemKind system = SystemKind::Boundary;

  int mesh_dim = 1;
  int mesh_n = 400;
  double mesh_lx = 1.0;
  double mesh_ly = 1.0;
  std::string gamma1 = "right";  // 1D: left|right|both, 2D: all|none

  BoundaryDelayParams boundary;  // alpha, beta, tau, xi, varpi, delta_w
  double tau = 0.5;
  double xi = 1.0;

  std::string a_kind = "strip";  // strip|constant
  double a_eps = 0.2;
  double a_amplitude = 1.0;
  double b_scale = 0.1;  // b = b_scale * a; 0 selects the undelayed generator

  int m_rho = 200;
  Profile y0;
  Profile z0;
  Profile history;

  double dt = 0.0;
  double t_end = 100.0;
  long snapshot_every = 0;
  std::vector<std::string> analyses;
  std::uint64_t seed = 1;

  // Analysis settings.
  double fit_t_min = -1.0;  // < 0: 10% of t_end
  double fit_t_max = -1.0;  // < 0: t_end
  double sweep_gamma_min = 20.0;
  double sweep_gamma_max = 200.0;
  int sweep_points = 60;
  bool two_grid = false;

  bool wants(std::string_view analysis) const;
  bool delayed() const;
};

/// Names accepted by `preset =` / --preset.
std::vector<std::string> preset_names();

/// Flat key = value text, '#' comments. Throws InputError (with line number)
/// on syntax errors or unknown keys, ParameterError on window violations.
Scenario parse_scenario(std::string_view text);
Scenario preset_scenario(std::string_view name);

/// Writes the resolved configuration back in parse_scenario syntax.
std::string format_scenario(const Scenario& s);

struct RunOptions {
  int jobs = 1;
  bool export_operators = false;
  std::ostream* log = nullptr;
};

/// Exit codes: 0 success, 1 input/I-O error, 2 invariant failure.
int run_scenario(const Scenario& s, const std::filesystem::path& out_dir,
                 const RunOptions& opt = {});

}  // namespace dwave
