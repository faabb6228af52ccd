#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "dwave/delayline.hpp"
#include "dwave/generator.hpp"

namespace dwave {

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;  // sorted by decreasing real part
  double abscissa = 0.0;
  /// min |Re lambda| over eigenvalues with |lambda| above the zero threshold.
  double imag_axis_margin = 0.0;
};

/// Largest dimension handled by the dense eigensolver.
inline constexpr Index kDenseSpectrumLimit = 4000;

/// Orthonormal basis of ker(c), as the trailing columns of a Householder
/// reflector mapping e_0 onto c / |c|.
Mat constraint_complement_basis(const Vec& c);

/// Restriction of A to the invariant subspace ker(c), in the basis above.
Mat deflated_matrix(const DiscreteGenerator& g);

SpectrumReport dense_spectrum(const Mat& A, double zero_tol = 1e-9);

/// All eigenvalues of A (deflate = false) or of A restricted to ker(c).
SpectrumReport spectrum(const DiscreteGenerator& g, bool deflate,
                        Index max_dim = kDenseSpectrumLimit);

/// z' = -alpha z - beta u(1) coupled to a transport delay line with inflow z.
/// State [z, u_1..u_m].
SpMat scalar_delay_block(double alpha, double beta, const DelayLine& dl);

/// G-weighted resolvent norms |(i gamma - A)^{-1}|, restricted to ker(c)
/// when deflating.
class ResolventEvaluator {
 public:
  enum class Method { Auto, Dense, Sparse };

  ResolventEvaluator(const DiscreteGenerator& g, bool deflate = true, Method method = Method::Auto);
  ~ResolventEvaluator();
  ResolventEvaluator(ResolventEvaluator&&) noexcept;
  ResolventEvaluator& operator=(ResolventEvaluator&&) noexcept;

  Method method() const { return method_; }
  /// Throws NumericalError when i gamma hits the spectrum.
  double operator()(double gamma) const;

 private:
  struct Dense;
  struct Sparse;
  Method method_;
  std::unique_ptr<Dense> dense_;
  std::unique_ptr<Sparse> sparse_;
};

/// Largest size for which Method::Auto picks the dense path.
inline constexpr Index kDenseResolventLimit = 600;

double resolvent_norm(const DiscreteGenerator& g, double gamma, bool deflate = true);

struct ResolventSweep {
  std::vector<double> gammas;
  std::vector<double> norms;
  double theta = 0.0;  // slope of log norm vs log gamma over the upper half
  double r_squared = 0.0;
};

ResolventSweep sweep_and_fit(const DiscreteGenerator& g, double gamma_min, double gamma_max,
                             int n_points, int jobs = 1, bool deflate = true);

/// Least-squares slope/R^2 of log norms against log gammas over the upper half of the points.
void fit_growth(ResolventSweep& sweep);

}  // namespace dwave
