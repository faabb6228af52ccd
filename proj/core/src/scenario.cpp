#include "dwave/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "dwave/analyze.hpp"
#include "dwave/errors.hpp"
#include "dwave/evolve.hpp"
#include "dwave/spectral.hpp"

namespace dwave {
namespace {

constexpr double kContractionTol = 1e-12;
constexpr double kConservationTol = 1e-10;
constexpr double kAuditTol = 1e-10;

const std::map<std::string, std::string, std::less<>>& presets() {
  static const std::map<std::string, std::string, std::less<>> table = {
      {"boundary-1d-exp",
       "system = boundary\n"
       "mesh.dim = 1\nmesh.n = 400\nmesh.lx = 1\ngamma1 = right\n"
       "alpha = 2\nbeta = 1\ntau = 0.5\nxi = 1\nm_rho = 200\n"
       "y0.kind = gaussian:0.5:0.5:0.1\nz0.kind = constant:1\nhistory.kind = zero\n"
       "t_end = 100\nanalyses = decay_fit,equilibrium\n"},
      {"boundary-1d-spectral",
       "system = boundary\n"
       "mesh.dim = 1\nmesh.n = 400\nmesh.lx = 1\ngamma1 = right\n"
       "alpha = 2\nbeta = 1\ntau = 0.5\nxi = 1\nm_rho = 200\n"
       "y0.kind = gaussian:0.5:0.5:0.1\nz0.kind = constant:1\nhistory.kind = zero\n"
       "t_end = 1\nanalyses = spectrum,resolvent_sweep\n"
       "sweep.gamma_min = 20\nsweep.gamma_max = 200\nsweep.points = 60\n"},
      {"trapped-square",
       "system = internal\n"
       "mesh.dim = 2\nmesh.n = 80\nmesh.lx = 1\nmesh.ly = 1\ngamma1 = none\n"
       "a.kind = strip\na.eps = 0.2\na.amplitude = 1\nb.scale = 0.1\n"
       "tau = 1\nxi = 1\nm_rho = 20\n"
       "y0.kind = zero\nz0.kind = random\nhistory.kind = zero\n"
       "t_end = 400\nanalyses = decay_fit,equilibrium\n"
       "fit.t_min = 20\nfit.t_max = 400\nseed = 7\ntwo_grid = true\n"},
      {"trapped-square-undelayed",
       "system = internal\n"
       "mesh.dim = 2\nmesh.n = 80\nmesh.lx = 1\nmesh.ly = 1\ngamma1 = none\n"
       "a.kind = strip\na.eps = 0.2\na.amplitude = 1\nb.scale = 0\n"
       "tau = 1\nm_rho = 20\n"
       "y0.kind = zero\nz0.kind = random\nhistory.kind = zero\n"
       "t_end = 400\nanalyses = decay_fit,equilibrium\n"
       "fit.t_min = 20\nfit.t_max = 400\nseed = 7\ntwo_grid = true\n"},
  };
  return table;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v, const std::string& where) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(out)) {
    throw InputError(where + ": expected a number, got '" + v + "'");
  }
  return out;
}

long to_long(const std::string& v, const std::string& where) {
  long out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw InputError(where + ": expected an integer, got '" + v + "'");
  }
  return out;
}

struct Entry {
  int line = 0;
  std::string key;
  std::string value;
};

std::vector<Entry> tokenize(std::string_view text, int line_offset = 0) {
  std::vector<Entry> out;
  std::istringstream is{std::string(text)};
  std::string raw;
  int line = line_offset;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(std::string_view(raw).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw InputError("line " + std::to_string(line) + ": expected 'key = value'");
    }
    Entry e{line, trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1))};
    if (e.key.empty() || e.value.empty()) {
      throw InputError("line " + std::to_string(line) + ": empty key or value");
    }
    out.push_back(std::move(e));
  }
  return out;
}

struct Explicit {
  bool xi = false;
  bool varpi = false;
  bool delta_w = false;
  bool dt = false;
};

using Setter = std::function<void(Scenario&, Explicit&, const std::string&, const std::string&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"system", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) {
         if (v == "boundary") s.system = SystemKind::Boundary;
         else if (v == "internal") s.system = SystemKind::Internal;
         else throw InputError(w + ": system must be boundary or internal");
       }},
      {"mesh.dim", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) {
         s.mesh_dim = static_cast<int>(to_long(v, w));
         if (s.mesh_dim != 1 && s.mesh_dim != 2) throw InputError(w + ": mesh.dim must be 1 or 2");
       }},
      {"mesh.n", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) {
         s.mesh_n = static_cast<int>(to_long(v, w));
       }},
      {"mesh.lx", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) { s.mesh_lx = to_double(v, w); }},
      {"mesh.ly", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) { s.mesh_ly = to_double(v, w); }},
      {"gamma1", [](Scenario& s, Explicit&, const std::string& v, const std::string&) { s.gamma1 = v; }},
      {"alpha", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) { s.boundary.alpha = to_double(v, w); }},
      {"beta", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) { s.boundary.beta = to_double(v, w); }},
      {"tau", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) { s.tau = to_double(v, w); }},
      {"xi", [](Scenario& s, Explicit& e, const std::string& v, const std::string& w) {
         s.xi = to_double(v, w);
         e.xi = true;
       }},
      {"varpi", [](Scenario& s, Explicit& e, const std::string& v, const std::string& w) {
         s.boundary.varpi = to_double(v, w);
         e.varpi = true;
       }},
      {"delta_w", [](Scenario& s, Explicit& e, const std::string& v, const std::string& w) {
         s.boundary.delta_w = to_double(v, w);
         e.delta_w = true;
       }},
      {"a.kind", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) {
         if (v != "strip" && v != "constant") throw InputError(w + ": a.kind must be strip or constant");
         s.a_kind = v;
       }},
      {"a.eps", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) { s.a_eps = to_double(v, w); }},
      {"a.amplitude", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) { s.a_amplitude = to_double(v, w); }},
      {"b.scale", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) { s.b_scale = to_double(v, w); }},
      {"m_rho", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) {
         s.m_rho = static_cast<int>(to_long(v, w));
       }},
      {"y0.kind", [](Scenario& s, Explicit&, const std::string& v, const std::string&) { s.y0 = parse_profile(v); }},
      {"z0.kind", [](Scenario& s, Explicit&, const std::string& v, const std::string&) { s.z0 = parse_profile(v); }},
      {"history.kind", [](Scenario& s, Explicit&, const std::string& v, const std::string&) { s.history = parse_profile(v); }},
      {"dt", [](Scenario& s, Explicit& e, const std::string& v, const std::string& w) {
         s.dt = to_double(v, w);
         e.dt = true;
       }},
      {"t_end", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) { s.t_end = to_double(v, w); }},
      {"snapshot_every", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) {
         s.snapshot_every = to_long(v, w);
       }},
      {"analyses", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) {
         s.analyses.clear();
         std::istringstream is(v);
         std::string item;
         while (std::getline(is, item, ',')) {
           item = trim(item);
           if (item.empty() || item == "none") continue;
           if (item != "decay_fit" && item != "equilibrium" && item != "spectrum" &&
               item != "resolvent_sweep") {
             throw InputError(w + ": unknown analysis '" + item + "'");
           }
           s.analyses.push_back(item);
         }
       }},
      {"seed", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) {
         const long seed = to_long(v, w);
         if (seed < 0) throw InputError(w + ": seed must be non-negative");
         s.seed = static_cast<std::uint64_t>(seed);
       }},
      {"fit.t_min", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) { s.fit_t_min = to_double(v, w); }},
      {"fit.t_max", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) { s.fit_t_max = to_double(v, w); }},
      {"sweep.gamma_min", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) { s.sweep_gamma_min = to_double(v, w); }},
      {"sweep.gamma_max", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) { s.sweep_gamma_max = to_double(v, w); }},
      {"sweep.points", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) {
         s.sweep_points = static_cast<int>(to_long(v, w));
       }},
      {"two_grid", [](Scenario& s, Explicit&, const std::string& v, const std::string& w) {
         if (v == "true" || v == "1") s.two_grid = true;
         else if (v == "false" || v == "0") s.two_grid = false;
         else throw InputError(w + ": two_grid must be true or false");
       }},
  };
  return table;
}

struct Geometry {
  double omega = 0.0;
  double gamma1 = 0.0;
};

Mesh make_mesh(const Scenario& s, int n) {
  if (s.mesh_dim == 1) {
    Gamma1End end = Gamma1End::Right;
    if (s.gamma1 == "left") end = Gamma1End::Left;
    else if (s.gamma1 == "both") end = Gamma1End::Both;
    return build_interval_mesh(n, s.mesh_lx, end);
  }
  return build_rect_mesh(n, n, s.mesh_lx, s.mesh_ly,
                         s.gamma1 == "all" ? Gamma1Spec::All : Gamma1Spec::None);
}

CoefField make_a(const Scenario& s, const Mesh& m) {
  if (s.a_kind == "constant") {
    return CoefField::from_values(Vec::Constant(m.num_nodes(), s.a_amplitude));
  }
  return damping_strip_field(m, s.a_eps, s.a_amplitude);
}

void resolve(Scenario& s, const Explicit& e) {
  if (s.mesh_n < 2) throw InputError("mesh.n must be at least 2");
  if (!(s.mesh_lx > 0.0) || (s.mesh_dim == 2 && !(s.mesh_ly > 0.0))) {
    throw InputError("mesh lengths must be positive");
  }
  if (s.mesh_dim == 1 && s.gamma1 != "left" && s.gamma1 != "right" && s.gamma1 != "both") {
    throw InputError("gamma1 must be left, right or both on an interval");
  }
  if (s.mesh_dim == 2 && s.gamma1 != "all" && s.gamma1 != "none") {
    throw InputError("gamma1 must be all or none on a rectangle");
  }
  if (!(s.tau > 0.0)) throw InputError("tau must be positive");
  if (s.m_rho < 2) throw InputError("m_rho must be at least 2");
  if (!(s.t_end > 0.0)) throw InputError("t_end must be positive");
  if (s.snapshot_every < 0) throw InputError("snapshot_every must be non-negative");

  const Mesh mesh = make_mesh(s, s.mesh_n);
  s.boundary.tau = s.tau;
  Index active = 0;
  if (s.system == SystemKind::Boundary) {
    if (s.gamma1 == "none") throw InputError("boundary system needs a nonempty gamma1");
    auto& p = s.boundary;
    if (!e.delta_w) p.delta_w = p.beta;
    if (!e.xi) s.xi = default_xi(p.alpha, p.beta, p.tau);
    p.xi = s.xi;
    if (!e.varpi) p.varpi = default_varpi(p, mesh.omega_measure(), mesh.gamma1_measure());
    const auto report = validate_boundary_params(p, mesh.omega_measure(), mesh.gamma1_measure());
    if (const auto* bad = report.first_violation()) {
      throw ParameterError(bad->inequality + " (admissible parameter window)");
    }
    active = static_cast<Index>(mesh.gamma1_nodes().size());
  } else {
    if (!(s.a_amplitude > 0.0)) throw ParameterError("a.amplitude must be positive");
    if (!(s.b_scale >= 0.0 && s.b_scale < 1.0)) throw ParameterError("b.scale must lie in [0, 1)");
    const double a_sup = s.a_amplitude;
    const double b_sup = s.b_scale * a_sup;
    if (!e.xi) s.xi = s.tau * a_sup;
    if (b_sup > 0.0) {
      const auto report = validate_internal_params({a_sup, b_sup, s.tau, s.xi});
      if (const auto* bad = report.first_violation()) {
        throw ParameterError(bad->inequality + " (admissible parameter window)");
      }
      const CoefField a = make_a(s, mesh);
      for (bool on : a.support_mask) active += on ? 1 : 0;
    }
  }
  if (!e.dt) s.dt = default_dt(mesh, s.tau, s.delayed() ? s.m_rho : 0);
  if (!(s.dt > 0.0)) throw InputError("dt must be positive");

  const Index size = 2 * mesh.num_nodes() + (s.delayed() ? active * s.m_rho : 0);
  if (s.wants("spectrum") && size > kDenseSpectrumLimit) {
    throw InputError("spectrum analysis needs a state dimension <= " + std::to_string(kDenseSpectrumLimit) +
                     " (this scenario has " + std::to_string(size) + "); use resolvent_sweep instead");
  }
  if (s.wants("resolvent_sweep") &&
      !(s.sweep_gamma_min > 0.0 && s.sweep_gamma_max > s.sweep_gamma_min && s.sweep_points >= 4)) {
    throw InputError("resolvent sweep needs 0 < gamma_min < gamma_max and at least 4 points");
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Deterministic per-profile stream so y0, z0 and history do not share samples.
Vec eval_profile(const Profile& p, const Mesh& m, std::uint64_t seed, std::uint64_t salt) {
  const Index n = m.num_nodes();
  Vec out = Vec::Zero(n);
  const auto arg = [&](std::size_t i, double def) { return i < p.args.size() ? p.args[i] : def; };
  if (p.kind == "zero") return out;
  if (p.kind == "constant") return Vec::Constant(n, arg(0, 1.0));
  if (p.kind == "gaussian") {
    const double cx = arg(0, 0.5 * m.lx);
    const double cy = arg(1, 0.5 * m.ly);
    const double w = arg(2, 0.1 * m.lx);
    for (Index i = 0; i < n; ++i) {
      const auto& x = m.node_coords[static_cast<std::size_t>(i)];
      double r2 = (x[0] - cx) * (x[0] - cx);
      if (m.dim == 2) r2 += (x[1] - cy) * (x[1] - cy);
      out[i] = std::exp(-r2 / (2.0 * w * w));
    }
    return out;
  }
  if (p.kind == "mode") {
    const double kx = arg(0, 1.0);
    const double ky = arg(1, 0.0);
    for (Index i = 0; i < n; ++i) {
      const auto& x = m.node_coords[static_cast<std::size_t>(i)];
      out[i] = std::cos(kx * M_PI * x[0] / m.lx);
      if (m.dim == 2) out[i] *= std::cos(ky * M_PI * x[1] / m.ly);
    }
    return out;
  }
  if (p.kind == "random") {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + salt);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (Index i = 0; i < n; ++i) out[i] = nd(rng);
    return out;
  }
  throw InputError("unknown profile kind '" + p.kind + "'");
}

struct Built {
  Mesh mesh;
  CoefField a, b;
  DiscreteGenerator gen;
  WaveState s0;
  Equilibrium eq;
};

Built build(const Scenario& s, int n) {
  Built out{make_mesh(s, n), {}, {}, {}, {}, {}};
  const Mesh& m = out.mesh;
  if (s.system == SystemKind::Boundary) {
    const auto dl = build_delayline(s.m_rho, s.tau);
    out.gen = assemble_boundary_generator(m, s.boundary, dl);
  } else {
    out.a = make_a(s, m);
    out.b = CoefField::from_values(s.b_scale * out.a.values);
    if (out.b.is_zero()) {
      out.gen = assemble_internal_undelayed(m, out.a);
    } else {
      const auto dl = build_delayline(s.m_rho, s.tau);
      out.gen = assemble_internal_generator(m, out.a, out.b, s.tau, s.xi, dl);
    }
  }
  out.s0 = WaveState(out.gen.layout);
  out.s0.y() = eval_profile(s.y0, m, s.seed, 1);
  out.s0.z() = eval_profile(s.z0, m, s.seed, 2);
  const auto& layout = out.gen.layout;
  if (layout.m_rho > 0) {
    // History is constant in the delay variable: u(x, rho) = g(x, -tau rho).
    const Vec hist = s.history.kind == "z0" ? Vec(out.s0.z()) : eval_profile(s.history, m, s.seed, 3);
    for (Index k = 0; k < layout.n_active(); ++k) {
      const double v = hist[layout.active_nodes[static_cast<std::size_t>(k)]];
      for (int j = 1; j <= layout.m_rho; ++j) out.s0.set_u(k, j, v);
    }
  }
  out.eq = s.system == SystemKind::Boundary ? equilibrium_chi(m, s.boundary, out.s0)
                                            : equilibrium_zeta(m, out.a, out.b, s.tau, out.s0);
  return out;
}

std::vector<double> column(const Trajectory& tr, double TrackerRow::*field) {
  std::vector<double> out;
  out.reserve(tr.trackers.size());
  for (const auto& r : tr.trackers) out.push_back(r.*field);
  return out;
}

// Log-spaced resample of the distance-to-equilibrium series over the fit window.
RankedFit fit_run(const Scenario& s, const Trajectory& tr) {
  const auto t = column(tr, &TrackerRow::t);
  const auto v = column(tr, &TrackerRow::dist_eq);
  FitWindow w;
  w.t_min = s.fit_t_min >= 0.0 ? s.fit_t_min : 0.1 * s.t_end;
  w.t_max = s.fit_t_max >= 0.0 ? s.fit_t_max : s.t_end;
  w.floor_ratio = 1e-10;
  const auto idx = log_spaced_indices(t, std::max(w.t_min, tr.trackers[1].t), w.t_max, 400);
  std::vector<double> ts, vs;
  for (auto i : idx) {
    ts.push_back(t[i]);
    vs.push_back(v[i]);
  }
  return classify_decay(ts, vs, w);
}

double relative_q_drift(const Trajectory& tr, const DiscreteGenerator& g, const WaveState& s0) {
  const double q0 = tr.trackers.front().Q;
  const double scale = std::max(std::abs(q0), g.constraint.cwiseProduct(s0.vector()).cwiseAbs().sum());
  double drift = 0.0;
  for (const auto& r : tr.trackers) drift = std::max(drift, std::abs(r.Q - q0));
  return scale > 0.0 ? drift / scale : drift;
}

}  // namespace

Profile parse_profile(std::string_view text) {
  Profile p;
  std::string t = trim(text);
  std::istringstream is(t);
  std::string part;
  bool first = true;
  while (std::getline(is, part, ':')) {
    part = trim(part);
    if (first) {
      p.kind = part;
      first = false;
    } else {
      p.args.push_back(to_double(part, "profile '" + t + "'"));
    }
  }
  static const char* kinds[] = {"zero", "constant", "gaussian", "mode", "random", "z0"};
  if (std::find(std::begin(kinds), std::end(kinds), p.kind) == std::end(kinds)) {
    throw InputError("unknown profile kind '" + p.kind + "'");
  }
  return p;
}

std::string to_string(const Profile& p) {
  std::string out = p.kind;
  for (double a : p.args) out += ":" + fmt(a);
  return out;
}

bool Scenario::wants(std::string_view analysis) const {
  return std::find(analyses.begin(), analyses.end(), analysis) != analyses.end();
}

bool Scenario::delayed() const {
  return system == SystemKind::Boundary || b_scale > 0.0;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : presets()) out.push_back(k);
  return out;
}

Scenario parse_scenario(std::string_view text) {
  auto entries = tokenize(text);
  Scenario s;
  Explicit e;
  const auto& table = setters();

  std::vector<Entry> merged;
  for (const auto& en : entries) {
    if (en.key != "preset") continue;
    const auto it = presets().find(en.value);
    if (it == presets().end()) {
      throw InputError("line " + std::to_string(en.line) + ": unknown preset '" + en.value + "'");
    }
    s.preset = en.value;
    for (auto& pe : tokenize(it->second)) {
      pe.line = en.line;
      merged.push_back(std::move(pe));
    }
  }
  for (const auto& en : entries) {
    if (en.key != "preset") merged.push_back(en);
  }
  for (const auto& en : merged) {
    const auto it = table.find(en.key);
    const std::string where = "line " + std::to_string(en.line) + " (" + en.key + ")";
    if (it == table.end()) {
      throw InputError("line " + std::to_string(en.line) + ": unknown key '" + en.key + "'");
    }
    it->second(s, e, en.value, where);
  }
  resolve(s, e);
  return s;
}

Scenario preset_scenario(std::string_view name) {
  return parse_scenario("preset = " + std::string(name) + "\n");
}

std::string format_scenario(const Scenario& s) {
  std::ostringstream os;
  if (!s.preset.empty()) os << "# preset " << s.preset << "\n";
  os << "system = " << (s.system == SystemKind::Boundary ? "boundary" : "internal") << "\n";
  os << "mesh.dim = " << s.mesh_dim << "\nmesh.n = " << s.mesh_n << "\nmesh.lx = " << fmt(s.mesh_lx)
     << "\nmesh.ly = " << fmt(s.mesh_ly) << "\ngamma1 = " << s.gamma1 << "\n";
  if (s.system == SystemKind::Boundary) {
    os << "alpha = " << fmt(s.boundary.alpha) << "\nbeta = " << fmt(s.boundary.beta)
       << "\nvarpi = " << fmt(s.boundary.varpi) << "\ndelta_w = " << fmt(s.boundary.delta_w) << "\n";
  } else {
    os << "a.kind = " << s.a_kind << "\na.eps = " << fmt(s.a_eps) << "\na.amplitude = "
       << fmt(s.a_amplitude) << "\nb.scale = " << fmt(s.b_scale) << "\n";
  }
  os << "tau = " << fmt(s.tau) << "\nxi = " << fmt(s.xi) << "\nm_rho = " << s.m_rho << "\n";
  os << "y0.kind = " << to_string(s.y0) << "\nz0.kind = " << to_string(s.z0)
     << "\nhistory.kind = " << to_string(s.history) << "\n";
  os << "dt = " << fmt(s.dt) << "\nt_end = " << fmt(s.t_end) << "\nsnapshot_every = " << s.snapshot_every
     << "\nseed = " << s.seed << "\n";
  os << "analyses = ";
  for (std::size_t i = 0; i < s.analyses.size(); ++i) os << (i ? "," : "") << s.analyses[i];
  if (s.analyses.empty()) os << "none";
  os << "\nfit.t_min = " << fmt(s.fit_t_min) << "\nfit.t_max = " << fmt(s.fit_t_max)
     << "\nsweep.gamma_min = " << fmt(s.sweep_gamma_min) << "\nsweep.gamma_max = "
     << fmt(s.sweep_gamma_max) << "\nsweep.points = " << s.sweep_points
     << "\ntwo_grid = " << (s.two_grid ? "true" : "false") << "\n";
  return os.str();
}

int run_scenario(const Scenario& s, const std::filesystem::path& out_dir, const RunOptions& opt) {
  std::ostream* log = opt.log;
  auto say = [&](const std::string& msg) {
    if (log) *log << msg << std::endl;
  };
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    say("cannot create output directory " + out_dir.string() + ": " + ec.message());
    return 1;
  }
  auto open = [&](const char* name) {
    std::ofstream f(out_dir / name);
    if (!f) throw std::ios_base::failure("cannot write " + (out_dir / name).string());
    f << std::setprecision(17);
    return f;
  };

  try {
    std::vector<std::string> summary;
    bool ok = true;
    auto check = [&](const std::string& name, bool pass, const std::string& detail) {
      summary.push_back(std::string(pass ? "PASS " : "FAIL ") + name + ": " + detail);
      ok = ok && pass;
    };

    Built b = build(s, s.mesh_n);
    say("generator " + std::string(to_string(b.gen.kind)) + ", state dimension " + std::to_string(b.gen.size()));
    if (opt.export_operators) {
      auto fa = open("A.coo");
      write_coo(fa, b.gen.A);
      auto fg = open("G.coo");
      write_coo(fg, b.gen.sparse_gram());
    }

    SimulateOptions so;
    so.equilibrium = b.eq.state.vector();
    so.snapshot_every = s.snapshot_every;
    say("simulating " + std::to_string(std::llround(s.t_end / s.dt)) + " steps, dt = " + fmt(s.dt));
    const Trajectory tr = simulate(b.gen, b.s0, s.dt, s.t_end, so);
    {
      auto f = open("trackers.csv");
      f << "t,g_norm,Q,dist_eq,diss_lhs,diss_rhs\n";
      for (const auto& r : tr.trackers) {
        f << r.t << ',' << r.g_norm << ',' << r.Q << ',' << r.dist_eq << ',' << r.diss_lhs << ','
          << r.diss_rhs << '\n';
      }
    }

    double max_sq = 0.0;
    for (const auto& r : tr.trackers) max_sq = std::max(max_sq, r.g_norm * r.g_norm);
    check("contraction", tr.max_norm_ratio <= 1.0 + kContractionTol,
          "max step norm ratio " + fmt(tr.max_norm_ratio));
    const double drift = relative_q_drift(tr, b.gen, b.s0);
    check("conservation", drift <= kConservationTol, "relative drift of Q " + fmt(drift));
    check("dissipation_audit", tr.max_audit_excess <= kAuditTol * std::max(1.0, max_sq),
          "max(lhs - rhs) " + fmt(tr.max_audit_excess));

    if (s.wants("equilibrium")) {
      const auto& last = tr.snapshots.back();
      const Vec dy = Vec(last.y()).array() - b.eq.value;
      const double l2 = std::sqrt(b.mesh.interior_quadrature.dot(dy.cwiseAbs2()));
      summary.push_back(std::string("equilibrium ") +
                        (b.eq.kind == EquilibriumKind::BoundaryChi ? "chi" : "zeta") + " = " +
                        fmt(b.eq.value));
      summary.push_back("final |y - eq|_L2 = " + fmt(l2) + ", relative " +
                        fmt(b.eq.value != 0.0 ? l2 / std::abs(b.eq.value) : l2));
      summary.push_back("final dist_eq = " + fmt(tr.trackers.back().dist_eq));
    }

    if (s.wants("decay_fit")) {
      const RankedFit rk = fit_run(s, tr);
      auto f = open("fits.csv");
      f << "model,C,rate,r2,t_min,t_max\n";
      for (const auto& fit : rk.fits) {
        f << to_string(fit.model) << ',' << fit.amplitude << ',' << fit.rate << ',' << fit.r_squared << ','
          << fit.t_min << ',' << fit.t_max << '\n';
        summary.push_back(std::string("fit ") + to_string(fit.model) + ": rate " + fmt(fit.rate) +
                          ", R^2 " + fmt(fit.r_squared));
      }
      summary.push_back(std::string("best model ") + to_string(rk.fits.front().model) + " (rss margin " +
                        fmt(rk.margin) + ")");
      if (s.two_grid) {
        say("two-grid check: rerunning at n = " + std::to_string(s.mesh_n / 2));
        Built coarse = build(s, s.mesh_n / 2);
        SimulateOptions co;
        co.equilibrium = coarse.eq.state.vector();
        co.audit = false;
        const double dt = default_dt(coarse.mesh, s.tau, s.delayed() ? s.m_rho : 0);
        const Trajectory ct = simulate(coarse.gen, coarse.s0, dt, s.t_end, co);
        const RankedFit crk = fit_run(s, ct);
        for (const auto& fit : crk.fits) {
          summary.push_back(std::string("coarse grid fit ") + to_string(fit.model) + ": rate " +
                            fmt(fit.rate) + ", R^2 " + fmt(fit.r_squared));
        }
      }
    }

    if (s.wants("spectrum")) {
      say("dense spectrum of the deflated generator");
      const auto rep = spectrum(b.gen, true);
      auto f = open("spectrum.csv");
      f << "re,im\n";
      for (const auto& l : rep.eigenvalues) f << l.real() << ',' << l.imag() << '\n';
      summary.push_back("spectral abscissa " + fmt(rep.abscissa) + ", imaginary-axis margin " +
                        fmt(rep.imag_axis_margin));
    }

    if (s.wants("resolvent_sweep")) {
      say("resolvent sweep over [" + fmt(s.sweep_gamma_min) + ", " + fmt(s.sweep_gamma_max) + "]");
      const auto sw = sweep_and_fit(b.gen, s.sweep_gamma_min, s.sweep_gamma_max, s.sweep_points, opt.jobs);
      auto f = open("sweep.csv");
      f << "gamma,resolvent_norm\n";
      for (std::size_t i = 0; i < sw.gammas.size(); ++i) f << sw.gammas[i] << ',' << sw.norms[i] << '\n';
      summary.push_back("resolvent growth exponent " + fmt(sw.theta) + " (R^2 " + fmt(sw.r_squared) + ")");
      if (s.two_grid) {
        Built coarse = build(s, s.mesh_n / 2);
        const auto cs = sweep_and_fit(coarse.gen, s.sweep_gamma_min, s.sweep_gamma_max, s.sweep_points, opt.jobs);
        auto fc = open("sweep_coarse.csv");
        fc << "gamma,resolvent_norm\n";
        for (std::size_t i = 0; i < cs.gammas.size(); ++i) fc << cs.gammas[i] << ',' << cs.norms[i] << '\n';
        summary.push_back("coarse grid resolvent growth exponent " + fmt(cs.theta));
      }
    }

    auto f = open("summary.txt");
    f << format_scenario(s) << "\n";
    for (const auto& line : summary) f << line << '\n';
    for (const auto& line : summary) say(line);
    return ok ? 0 : 2;
  } catch (const InputError& e) {
    say(std::string("input error: ") + e.what());
    return 1;
  } catch (const ParameterError& e) {
    say(std::string("parameter error: ") + e.what());
    return 1;
  } catch (const std::ios_base::failure& e) {
    say(std::string("I/O error: ") + e.what());
    return 1;
  } catch (const NumericalError& e) {
    say(std::string("numerical failure: ") + e.what());
    return 2;
  }
}

}  // namespace dwave
