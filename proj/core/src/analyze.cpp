#include "dwave/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dwave/errors.hpp"

namespace dwave {

const char* to_string(DecayModel m) {
  switch (m) {
    case DecayModel::Exponential: return "exponential";
    case DecayModel::Polynomial: return "polynomial";
    case DecayModel::Logarithmic: return "logarithmic";
  }
  return "unknown";
}

namespace {

double feature(DecayModel m, double t) {
  switch (m) {
    case DecayModel::Exponential: return t;
    case DecayModel::Polynomial: return std::log(t);
    case DecayModel::Logarithmic: return std::log(std::log(2.0 + t));
  }
  return t;
}

}  // namespace

DecayFit fit_decay(std::span<const double> t, std::span<const double> v, DecayModel model,
                   const FitWindow& window) {
  if (t.size() != v.size()) throw InputError("fit_decay: t and v differ in length");
  if (t.empty()) throw InputError("fit_decay: empty series");
  const double t_last = t.back();
  const double lo = window.t_min >= 0.0 ? window.t_min : 0.1 * t_last;
  const double hi = window.t_max >= 0.0 ? window.t_max : t_last;
  if (!(hi > lo)) throw InputError("fit_decay: degenerate fit window");

  double vmax = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= lo && t[i] <= hi) vmax = std::max(vmax, v[i]);
  }
  const double floor = window.floor_ratio * vmax;

  std::vector<double> xs, ys;
  double used_lo = std::numeric_limits<double>::infinity();
  double used_hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < lo || t[i] > hi) continue;
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) throw InputError("fit_decay: values must be positive");
    if (v[i] <= floor) continue;
    if (model == DecayModel::Polynomial && !(t[i] > 0.0)) {
      throw InputError("fit_decay: polynomial model needs t > 0");
    }
    xs.push_back(feature(model, t[i]));
    ys.push_back(std::log(v[i]));
    used_lo = std::min(used_lo, t[i]);
    used_hi = std::max(used_hi, t[i]);
  }
  if (xs.size() < 10) throw InputError("fit_decay: fewer than 10 samples in the fit window");

  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw InputError("fit_decay: degenerate fit window");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    rss += r * r;
  }

  DecayFit fit;
  fit.model = model;
  fit.amplitude = std::exp(intercept);
  fit.rate = -slope;
  fit.rss = rss;
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - rss / syy, 0.0, 1.0) : 1.0;
  fit.t_min = used_lo;
  fit.t_max = used_hi;
  fit.samples = static_cast<Index>(xs.size());
  return fit;
}

RankedFit classify_decay(std::span<const double> t, std::span<const double> v,
                         const FitWindow& window) {
  RankedFit out;
  for (auto m : {DecayModel::Exponential, DecayModel::Polynomial, DecayModel::Logarithmic}) {
    out.fits.push_back(fit_decay(t, v, m, window));
  }
  std::stable_sort(out.fits.begin(), out.fits.end(),
                   [](const DecayFit& a, const DecayFit& b) { return a.rss < b.rss; });
  const double best = out.fits[0].rss;
  out.margin = best > 0.0 ? out.fits[1].rss / best : std::numeric_limits<double>::infinity();
  return out;
}

Equilibrium equilibrium_chi(const Mesh& m, const BoundaryDelayParams& p, const WaveState& s0) {
  const auto g1 = m.gamma1_nodes();
  const double g1_measure = m.gamma1_measure();
  if (g1.empty() || !(g1_measure > 0.0)) throw InputError("equilibrium_chi: Gamma1 has zero measure");
  const auto& layout = s0.layout();
  if (layout.n_nodes != m.num_nodes()) throw InputError("equilibrium_chi: state does not match mesh");
  const bool delayed = layout.m_rho > 0;
  if (delayed && layout.n_active() != static_cast<Index>(g1.size())) {
    throw InputError("equilibrium_chi: delay line is not carried by Gamma1");
  }

  const double s = p.alpha + (delayed ? p.beta : 0.0);
  double num = integrate(m, s0.z());
  double history = 0.0;
  for (std::size_t b = 0; b < g1.size(); ++b) {
    num += s * g1[b].weight * s0.y()[g1[b].node];
    if (!delayed) continue;
    double line = 0.0;
    for (int j = 1; j <= layout.m_rho; ++j) line += s0.u(static_cast<Index>(b), j);
    history += g1[b].weight * line / layout.m_rho;
  }
  if (delayed) num -= p.beta * p.tau * history;

  Equilibrium eq;
  eq.kind = EquilibriumKind::BoundaryChi;
  eq.value = num / (s * g1_measure);
  eq.state = WaveState(layout);
  eq.state.y().setConstant(eq.value);
  return eq;
}

Equilibrium equilibrium_zeta(const Mesh& m, const CoefField& a, const CoefField& b, double tau,
                             const WaveState& s0) {
  const auto& layout = s0.layout();
  if (layout.n_nodes != m.num_nodes() || a.values.size() != m.num_nodes() ||
      b.values.size() != m.num_nodes()) {
    throw InputError("equilibrium_zeta: size mismatch");
  }
  const Vec ab = a.values + b.values;
  const double denom = integrate(m, ab);
  if (!(denom > 0.0)) throw InputError("equilibrium_zeta: a + b vanishes");

  double num = integrate(m, s0.z()) + integrate(m, ab.cwiseProduct(Vec(s0.y())));
  for (Index k = 0; k < layout.n_active(); ++k) {
    const Index node = layout.active_nodes[static_cast<std::size_t>(k)];
    double line = 0.0;
    for (int j = 1; j <= layout.m_rho; ++j) line += s0.u(k, j);
    num -= tau * b.values[node] * m.interior_quadrature[node] * line / layout.m_rho;
  }

  Equilibrium eq;
  eq.kind = EquilibriumKind::InternalZeta;
  eq.value = num / denom;
  eq.state = WaveState(layout);
  eq.state.y().setConstant(eq.value);
  return eq;
}

double distance_to_equilibrium(const DiscreteGenerator& g, const WaveState& s,
                               const Equilibrium& eq) {
  if (!(s.layout() == g.layout) || !(eq.state.layout() == g.layout)) {
    throw InputError("distance_to_equilibrium: layout mismatch");
  }
  return g.norm(s.vector() - eq.state.vector());
}

std::vector<std::size_t> log_spaced_indices(std::span<const double> t, double t_lo, double t_hi,
                                            std::size_t count) {
  std::vector<std::size_t> out;
  if (t.empty() || count == 0 || !(t_lo > 0.0) || !(t_hi > t_lo)) return out;
  const double r = std::log(t_hi / t_lo);
  const double slack = 1e-9 * t_hi;
  const double denom = static_cast<double>(count > 1 ? count - 1 : 1);
  for (std::size_t k = 0; k < count; ++k) {
    const double target = std::min(t_hi, t_lo * std::exp(r * static_cast<double>(k) / denom));
    // Nearest sample to the target.
    auto it = std::lower_bound(t.begin(), t.end(), target);
    std::size_t i = static_cast<std::size_t>(it - t.begin());
    if (i == t.size() || (i > 0 && target - t[i - 1] < t[i] - target)) {
      if (i == 0) continue;
      --i;
    }
    if (t[i] < t_lo - slack || t[i] > t_hi + slack) continue;
    if (out.empty() || out.back() < i) out.push_back(i);
  }
  return out;
}

}  // namespace dwave
