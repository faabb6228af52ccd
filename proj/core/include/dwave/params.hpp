#pragma once

#include <limits>
#include <string>
#include <vector>

namespace dwave {

/// Coefficients of the wave equation with a delayed boundary feedback
///   dy/dnu = -alpha y_t(t) - beta y_t(t - tau)  on Gamma1.
/// `xi` weights the delay line in the energy, `varpi` weights the rank-one
/// coupling term built from the conserved functional, and `delta_w` is the
/// auxiliary constant entering the admissible bound on `varpi`.
struct BoundaryDelayParams {
  double alpha = 2.0;
  double beta = 1.0;
  double tau = 0.5;
  double xi = 1.0;
  double varpi = 0.0;
  double delta_w = 1.0;
};

/// Sup-norm summary of the localized damping a(x) and delayed damping b(x).
struct InternalDelayParams {
  double a_sup = 1.0;
  double b_sup = 0.1;
  double tau = 1.0;
  double xi = 1.0;
};

struct ConstraintCheck {
  std::string name;        // short identifier, e.g. "xi_lower"
  std::string inequality;  // human readable, e.g. "xi must exceed tau*beta"
  bool satisfied = false;
  double margin = 0.0;     // positive when satisfied
};

struct ValidationReport {
  std::vector<ConstraintCheck> checks;
  std::vector<std::string> notes;

  bool valid() const;
  /// First violated check, or nullptr when valid.
  const ConstraintCheck* first_violation() const;
  std::string to_string() const;
};

/// Three-term upper bound on varpi. Throws ParameterError if alpha+beta <= delta_w.
double varpi_upper_bound(const BoundaryDelayParams& p, double omega_measure,
                         double gamma1_measure);

ValidationReport validate_boundary_params(const BoundaryDelayParams& p,
                                          double omega_measure,
                                          double gamma1_measure);

/// Midpoint tau*alpha of the open window (tau*beta, tau*(2*alpha - beta)).
double default_xi(double alpha, double beta, double tau);

/// Half the admissible bound, optionally capped by `varpi_max`.
double default_varpi(const BoundaryDelayParams& p, double omega_measure,
                     double gamma1_measure,
                     double varpi_max = std::numeric_limits<double>::infinity());

ValidationReport validate_internal_params(const InternalDelayParams& q);

}  // namespace dwave
