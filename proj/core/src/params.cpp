#include "dwave/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dwave/errors.hpp"

namespace dwave {
namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw InputError(std::string(name) + " must be finite");
  }
}

void require_positive(double v, const char* name) {
  require_finite(v, name);
  if (v <= 0.0) {
    throw InputError(std::string(name) + " must be positive");
  }
}

ConstraintCheck strict_less(std::string name, std::string text, double lhs,
                            double rhs) {
  return {std::move(name), std::move(text), lhs < rhs, rhs - lhs};
}

}  // namespace

bool ValidationReport::valid() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ConstraintCheck& c) { return c.satisfied; });
}

const ConstraintCheck* ValidationReport::first_violation() const {
  for (const auto& c : checks) {
    if (!c.satisfied) return &c;
  }
  return nullptr;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.satisfied ? "[ok]   " : "[FAIL] ") << c.inequality
       << " (margin " << c.margin << ")\n";
  }
  for (const auto& n : notes) os << "note: " << n << '\n';
  return os.str();
}

double varpi_upper_bound(const BoundaryDelayParams& p, double omega_measure,
                         double gamma1_measure) {
  const double s = p.alpha + p.beta;
  const double gap = s - p.delta_w;
  if (!(gap > 0.0)) {
    throw ParameterError("delta_w must be below alpha+beta");
  }
  const double b1 = 1.0 / (s * gap);
  const double b2 = p.delta_w / (2.0 * gap * omega_measure);
  const double b3 = p.delta_w * p.xi / (2.0 * gap * gamma1_measure);
  return std::min({b1, b2, b3});
}

ValidationReport validate_boundary_params(const BoundaryDelayParams& p,
                                          double omega_measure,
                                          double gamma1_measure) {
  require_positive(p.alpha, "alpha");
  require_positive(p.tau, "tau");
  require_finite(p.beta, "beta");
  require_finite(p.xi, "xi");
  require_finite(p.varpi, "varpi");
  require_finite(p.delta_w, "delta_w");
  require_positive(omega_measure, "|Omega|");
  require_positive(gamma1_measure, "|Gamma1|");

  ValidationReport r;
  r.checks.push_back(strict_less("beta_positive", "beta must be positive", 0.0, p.beta));
  r.checks.push_back(strict_less("beta_below_alpha", "beta must be below alpha", p.beta, p.alpha));
  r.checks.push_back(strict_less("xi_lower", "xi must exceed tau*beta", p.tau * p.beta, p.xi));
  r.checks.push_back(strict_less("xi_upper", "xi must be below tau*(2*alpha - beta)", p.xi,
                                 p.tau * (2.0 * p.alpha - p.beta)));
  r.checks.push_back(strict_less("delta_w_positive", "delta_w must be positive", 0.0, p.delta_w));
  r.checks.push_back(strict_less("delta_w_upper", "delta_w must be below alpha+beta", p.delta_w,
                                 p.alpha + p.beta));
  r.checks.push_back(strict_less("varpi_positive", "varpi must be positive", 0.0, p.varpi));
  if (p.delta_w > 0.0 && p.delta_w < p.alpha + p.beta) {
    const double bound = varpi_upper_bound(p, omega_measure, gamma1_measure);
    r.checks.push_back(strict_less("varpi_upper", "varpi must be below the three-term bound",
                                   p.varpi, bound));
  } else {
    r.checks.push_back({"varpi_upper", "varpi must be below the three-term bound", false, 0.0});
  }
  return r;
}

double default_xi(double alpha, double beta, double tau) {
  require_finite(alpha, "alpha");
  require_finite(beta, "beta");
  require_positive(tau, "tau");
  if (!(beta > 0.0 && beta < alpha)) {
    throw ParameterError("xi window is empty: need 0 < beta < alpha");
  }
  return tau * alpha;
}

double default_varpi(const BoundaryDelayParams& p, double omega_measure,
                     double gamma1_measure, double varpi_max) {
  if (!(p.delta_w > 0.0)) {
    throw ParameterError("delta_w must be positive");
  }
  const double bound = varpi_upper_bound(p, omega_measure, gamma1_measure);
  return std::min(0.5 * bound, varpi_max);
}

ValidationReport validate_internal_params(const InternalDelayParams& q) {
  require_finite(q.a_sup, "a_sup");
  require_finite(q.b_sup, "b_sup");
  require_positive(q.tau, "tau");
  require_finite(q.xi, "xi");

  ValidationReport r;
  r.checks.push_back(strict_less("b_positive", "|b|_inf must be positive", 0.0, q.b_sup));
  r.checks.push_back(strict_less("b_below_a", "|b|_inf must be below |a|_inf", q.b_sup, q.a_sup));
  r.checks.push_back(strict_less("xi_lower", "xi must exceed tau*|b|_inf", q.tau * q.b_sup, q.xi));
  r.checks.push_back(strict_less("xi_upper", "xi must be below tau*(2*|a|_inf - |b|_inf)", q.xi,
                                 q.tau * (2.0 * q.a_sup - q.b_sup)));
  if (q.b_sup == 0.0) {
    r.notes.push_back("b vanishes: use the undelayed generator A_{a,0}");
  }
  return r;
}

}  // namespace dwave
