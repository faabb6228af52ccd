#include "dwave/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include "dwave/errors.hpp"

namespace dwave {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;

namespace {

// Unit w with (I - 2 w w^T) e_0 = +-c/|c|.
Vec householder_vector(const Vec& c) {
  const double nc = c.norm();
  if (!(nc > 0.0)) throw InputError("constraint row vanishes");
  Vec w = -c / nc;
  w[0] += 1.0;
  if (w.norm() < 1e-8) {
    w = c / nc;
    w[0] += 1.0;
  }
  return w / w.norm();
}

// H M H with H = I - 2 w w^T, for a dense symmetric or general M given by products.
Mat reflect_both(const Mat& m, const Vec& w) {
  const Vec mw = m * w;
  const Vec wm = m.transpose() * w;
  const double wmw = w.dot(mw);
  Mat out = m;
  out.noalias() -= 2.0 * w * wm.transpose();
  out.noalias() -= 2.0 * mw * w.transpose();
  out.noalias() += (4.0 * wmw) * w * w.transpose();
  return out;
}

Mat reflect_both(const SpMat& m, const Vec& w) {
  const Vec mw = m * w;
  const Vec wm = m.transpose() * w;
  const double wmw = w.dot(mw);
  Mat out = Mat(m);
  out.noalias() -= 2.0 * w * wm.transpose();
  out.noalias() -= 2.0 * mw * w.transpose();
  out.noalias() += (4.0 * wmw) * w * w.transpose();
  return out;
}

}  // namespace

Mat constraint_complement_basis(const Vec& c) {
  const Vec w = householder_vector(c);
  const Index n = c.size();
  Mat v = -2.0 * w * w.tail(n - 1).transpose();
  for (Index k = 1; k < n; ++k) v(k, k - 1) += 1.0;
  return v;
}

Mat deflated_matrix(const DiscreteGenerator& g) {
  const Vec w = householder_vector(g.constraint);
  const Index n = g.size();
  return reflect_both(g.A, w).bottomRightCorner(n - 1, n - 1);
}

SpectrumReport dense_spectrum(const Mat& A, double zero_tol) {
  Eigen::EigenSolver<Mat> es(A, false);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver did not converge");
  SpectrumReport r;
  const auto& ev = es.eigenvalues();
  r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::stable_sort(r.eigenvalues.begin(), r.eigenvalues.end(),
                   [](const cd& a, const cd& b) { return a.real() > b.real(); });
  double scale = 1.0;
  for (const auto& l : r.eigenvalues) scale = std::max(scale, std::abs(l));
  r.abscissa = r.eigenvalues.empty() ? 0.0 : r.eigenvalues.front().real();
  r.imag_axis_margin = std::numeric_limits<double>::infinity();
  for (const auto& l : r.eigenvalues) {
    if (std::abs(l) <= zero_tol * scale) continue;
    r.imag_axis_margin = std::min(r.imag_axis_margin, std::abs(l.real()));
  }
  return r;
}

SpectrumReport spectrum(const DiscreteGenerator& g, bool deflate, Index max_dim) {
  if (g.size() > max_dim) {
    throw InputError("state dimension " + std::to_string(g.size()) +
                     " is too large for the dense eigensolver; use the resolvent sweep only");
  }
  return deflate ? dense_spectrum(deflated_matrix(g)) : dense_spectrum(Mat(g.A));
}

SpMat scalar_delay_block(double alpha, double beta, const DelayLine& dl) {
  const int m = dl.m_rho;
  const double c = dl.rate();
  std::vector<Triplet> trip;
  trip.emplace_back(0, 0, -alpha);
  trip.emplace_back(0, m, -beta);
  for (int j = 1; j <= m; ++j) {
    trip.emplace_back(j, j, -c);
    trip.emplace_back(j, j - 1, c);
  }
  SpMat a(m + 1, m + 1);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

// Dense path: A_hat = M A M^{-1} with M^T M the Gram matrix (restricted to
// ker c when deflating); the norm is 1 / sigma_min(i gamma - A_hat).
struct ResolventEvaluator::Dense {
  Mat a_hat;

  double eval(double gamma) const {
    const Index n = a_hat.rows();
    CMat b = -a_hat.cast<cd>();
    b.diagonal().array() += cd(0.0, gamma);
    Eigen::BDCSVD<CMat> svd(b);
    const double smin = svd.singularValues()(n - 1);
    if (!(smin > 1e-14 * std::max(1.0, svd.singularValues()(0)))) {
      throw NumericalError("i*gamma hits the spectrum at gamma = " + std::to_string(gamma));
    }
    return 1.0 / smin;
  }
};

// Sparse path: Lanczos on R^* R in the inner product of G' = gram + varpi' c c^T,
// which agrees with G on ker c. The oblique projector along the kernel vector k
// onto ker c is G'-orthogonal.
struct ResolventEvaluator::Sparse {
  SpMat a;
  Eigen::SparseMatrix<cd> gram;
  Vec c;
  Vec k;
  double ck = 0.0;
  double varpi = 0.0;
  bool deflate = true;
  Eigen::SparseLU<SpMat> bordered;  // [[gram, c], [c^T, -1/varpi]]

  CVec apply_g(const CVec& x) const {
    CVec out = gram * x;
    out += (varpi * c.cast<cd>().dot(x)) * c.cast<cd>();
    return out;
  }
  CVec solve_g(const CVec& r) const {
    const Index n = r.size();
    Vec br = Vec::Zero(n + 1), bi = Vec::Zero(n + 1);
    br.head(n) = r.real();
    bi.head(n) = r.imag();
    const Vec xr = bordered.solve(br);
    const Vec xi = bordered.solve(bi);
    CVec out(n);
    out.real() = xr.head(n);
    out.imag() = xi.head(n);
    return out;
  }
  void project(CVec& x) const {
    if (!deflate) return;
    const cd s = c.cast<cd>().dot(x) / ck;
    x -= s * k.cast<cd>();
  }
  cd inner(const CVec& x, const CVec& y) const { return x.dot(apply_g(y)); }

  double eval(double gamma) const {
    const Index n = a.rows();
    // Deflating, solve with [[i gamma - A, k], [c^T, -c.k]]: its leading block acts
    // as i gamma - A + k c^T / (c.k), which equals i gamma - A on ker c, maps ker c
    // onto itself and stays invertible at gamma = 0.
    const Index nb = deflate ? n + 1 : n;
    std::vector<Eigen::Triplet<cd>> trip;
    trip.reserve(static_cast<std::size_t>(a.nonZeros() + n + (deflate ? 2 * n + 1 : 0)));
    for (Index col = 0; col < a.outerSize(); ++col) {
      for (SpMat::InnerIterator it(a, col); it; ++it) trip.emplace_back(it.row(), it.col(), -it.value());
    }
    for (Index i = 0; i < n; ++i) trip.emplace_back(i, i, cd(0.0, gamma));
    if (deflate) {
      for (Index i = 0; i < n; ++i) {
        if (k[i] != 0.0) trip.emplace_back(i, n, k[i]);
        if (c[i] != 0.0) trip.emplace_back(n, i, c[i]);
      }
      trip.emplace_back(n, n, -ck);
    }
    Eigen::SparseMatrix<cd> shifted(nb, nb);
    shifted.setFromTriplets(trip.begin(), trip.end());
    shifted.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<cd>> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success) {
      throw NumericalError("i*gamma hits the spectrum at gamma = " + std::to_string(gamma));
    }
    auto pad = [&](const CVec& x) {
      CVec out = CVec::Zero(nb);
      out.head(n) = x;
      return out;
    };
    auto apply_t = [&](const CVec& q) {
      const CVec w1 = CVec(lu.solve(pad(q))).head(n);
      const CVec w2 = apply_g(w1);
      const CVec w3 = CVec(lu.adjoint().solve(pad(w2))).head(n);
      CVec w4 = solve_g(w3);
      project(w4);
      return w4;
    };

    std::mt19937_64 rng(12345);
    std::normal_distribution<double> nd;
    CVec q(n);
    for (Index i = 0; i < n; ++i) q[i] = cd(nd(rng), nd(rng));
    project(q);
    q /= std::sqrt(std::real(inner(q, q)));

    const int max_steps = static_cast<int>(std::min<Index>(n - 1, 80));
    std::vector<CVec> basis;
    std::vector<double> alphas, betas;
    double prev = 0.0;
    double theta = 0.0;
    for (int step = 0; step < max_steps; ++step) {
      basis.push_back(q);
      CVec w = apply_t(q);
      const double alpha = std::real(inner(q, w));
      alphas.push_back(alpha);
      // Full reorthogonalization, twice.
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) w -= inner(b, w) * b;
      }
      const double beta = std::sqrt(std::max(0.0, std::real(inner(w, w))));

      const Index m = static_cast<Index>(alphas.size());
      Mat t = Mat::Zero(m, m);
      for (Index i = 0; i < m; ++i) {
        t(i, i) = alphas[static_cast<std::size_t>(i)];
        if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = betas[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Mat> es(t, Eigen::EigenvaluesOnly);
      theta = es.eigenvalues().maxCoeff();
      if (!std::isfinite(theta)) throw NumericalError("non-finite resolvent estimate");
      if (step >= 4 && std::abs(theta - prev) <= 1e-12 * theta) break;
      if (beta <= 1e-13 * std::max(1.0, theta)) break;
      prev = theta;
      betas.push_back(beta);
      q = w / beta;
    }
    return std::sqrt(theta);
  }
};

ResolventEvaluator::ResolventEvaluator(const DiscreteGenerator& g, bool deflate, Method method)
    : method_(method) {
  if (method_ == Method::Auto) {
    method_ = g.size() <= kDenseResolventLimit ? Method::Dense : Method::Sparse;
  }
  if (method_ == Method::Dense) {
    dense_ = std::make_unique<Dense>();
    Mat a_s, g_s;
    if (deflate) {
      const Vec w = householder_vector(g.constraint);
      const Index n = g.size();
      a_s = reflect_both(g.A, w).bottomRightCorner(n - 1, n - 1);
      g_s = reflect_both(g.dense_gram(), w).bottomRightCorner(n - 1, n - 1);
    } else {
      a_s = Mat(g.A);
      g_s = g.dense_gram();
    }
    g_s = 0.5 * (g_s + g_s.transpose());
    Eigen::LLT<Mat> llt(g_s);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("Gram matrix is not positive definite on the chosen subspace");
    }
    const Mat l = llt.matrixL();
    // a_hat = L^T a_s L^{-T}
    const Mat x = l.triangularView<Eigen::Lower>().solve(a_s.transpose()).transpose();
    dense_->a_hat = l.transpose() * x;
  } else {
    sparse_ = std::make_unique<Sparse>();
    auto& s = *sparse_;
    s.a = g.A;
    s.gram = g.gram.cast<cd>();
    s.c = g.constraint;
    s.k = g.kernel_direction();
    s.ck = s.c.dot(s.k);
    s.deflate = deflate;
    s.varpi = g.varpi > 0.0 ? g.varpi : 1.0;
    if (!deflate && g.varpi <= 0.0) {
      throw NumericalError("Gram matrix is singular without deflation");
    }
    if (deflate && !(std::abs(s.ck) > 0.0)) throw NumericalError("constraint does not see the kernel");
    const Index n = g.size();
    std::vector<Triplet> trip;
    for (Index col = 0; col < g.gram.outerSize(); ++col) {
      for (SpMat::InnerIterator it(g.gram, col); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    }
    for (Index i = 0; i < n; ++i) {
      if (s.c[i] != 0.0) {
        trip.emplace_back(i, n, s.c[i]);
        trip.emplace_back(n, i, s.c[i]);
      }
    }
    trip.emplace_back(n, n, -1.0 / s.varpi);
    SpMat b(n + 1, n + 1);
    b.setFromTriplets(trip.begin(), trip.end());
    b.makeCompressed();
    s.bordered.compute(b);
    if (s.bordered.info() != Eigen::Success) throw NumericalError("Gram factorization failed");
  }
}

ResolventEvaluator::~ResolventEvaluator() = default;
ResolventEvaluator::ResolventEvaluator(ResolventEvaluator&&) noexcept = default;
ResolventEvaluator& ResolventEvaluator::operator=(ResolventEvaluator&&) noexcept = default;

double ResolventEvaluator::operator()(double gamma) const {
  return dense_ ? dense_->eval(gamma) : sparse_->eval(gamma);
}

double resolvent_norm(const DiscreteGenerator& g, double gamma, bool deflate) {
  return ResolventEvaluator(g, deflate)(gamma);
}

void fit_growth(ResolventSweep& sweep) {
  const std::size_t n = sweep.gammas.size();
  const std::size_t start = n / 2;
  const std::size_t m = n - start;
  if (m < 2) {
    sweep.theta = 0.0;
    sweep.r_squared = 0.0;
    return;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    mx += std::log(sweep.gammas[i]);
    my += std::log(sweep.norms[i]);
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    const double dx = std::log(sweep.gammas[i]) - mx;
    const double dy = std::log(sweep.norms[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  sweep.theta = sxy / sxx;
  const double rss = syy - sxy * sxy / sxx;
  sweep.r_squared = syy > 0.0 ? std::clamp(1.0 - rss / syy, 0.0, 1.0) : 1.0;
}

ResolventSweep sweep_and_fit(const DiscreteGenerator& g, double gamma_min, double gamma_max,
                             int n_points, int jobs, bool deflate) {
  if (!(gamma_min > 0.0) || !(gamma_max > gamma_min) || n_points < 2) {
    throw InputError("sweep needs 0 < gamma_min < gamma_max and at least 2 points");
  }
  ResolventSweep sweep;
  sweep.gammas.resize(static_cast<std::size_t>(n_points));
  sweep.norms.resize(static_cast<std::size_t>(n_points));
  const double r = std::log(gamma_max / gamma_min);
  for (int i = 0; i < n_points; ++i) {
    sweep.gammas[static_cast<std::size_t>(i)] = gamma_min * std::exp(r * i / (n_points - 1));
  }
  sweep.gammas.back() = gamma_max;

  const ResolventEvaluator eval(g, deflate);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < n_points; i = next++) {
      try {
        sweep.norms[static_cast<std::size_t>(i)] = eval(sweep.gammas[static_cast<std::size_t>(i)]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int nthreads = std::max(1, std::min(jobs, n_points));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  fit_growth(sweep);
  return sweep;
}

}  // namespace dwave
