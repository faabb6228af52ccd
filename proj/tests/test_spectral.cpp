#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "dwave/errors.hpp"
#include "dwave/spectral.hpp"
#include "oracles.hpp"

using namespace dwave;

namespace {

DiscreteGenerator scalar_block(bool with_varpi) {
  DiscreteGenerator g;
  g.layout.n_nodes = 1;
  SpMat a(2, 2), gram(2, 2);
  a.insert(0, 0) = -1.0;
  a.insert(1, 1) = -1.0;
  gram.insert(0, 0) = 1.0;
  gram.insert(1, 1) = 1.0;
  g.A = a;
  g.gram = gram;
  g.constraint = Vec::Zero(2);
  g.varpi = with_varpi ? 1.0 : 0.0;
  return g;
}

DiscreteGenerator boundary(int n, int m_rho, double alpha = 2.0, double beta = 1.0) {
  const Mesh m = build_interval_mesh(n, 1.0, Gamma1End::Right);
  BoundaryDelayParams p{alpha, beta, 0.5, default_xi(alpha, beta, 0.5), 0.0, beta};
  p.varpi = default_varpi(p, m.omega_measure(), m.gamma1_measure());
  return assemble_boundary_generator(m, p, build_delayline(m_rho, 0.5));
}

std::complex<double> dominant(const SpMat& a) {
  Eigen::EigenSolver<Mat> es(Mat(a), false);
  const auto ev = es.eigenvalues();
  Index best = 0;
  for (Index i = 1; i < ev.size(); ++i) {
    if (ev[i].real() > ev[best].real() || (ev[i].real() == ev[best].real() && ev[i].imag() > ev[best].imag())) best = i;
  }
  const auto l = ev[best];
  return {l.real(), std::abs(l.imag())};
}

// Independent deflation: orthonormal complement of c from a full QR.
double resolvent_at_zero_oracle(const DiscreteGenerator& g) {
  const Index n = g.size();
  Eigen::HouseholderQR<Mat> qr(Mat(g.constraint));
  const Mat q = qr.householderQ() * Mat::Identity(n, n);
  const Mat basis = q.rightCols(n - 1);
  const Mat as = basis.transpose() * Mat(g.A) * basis;
  const Mat gs = basis.transpose() * g.dense_gram() * basis;
  const Mat l = Eigen::LLT<Mat>(0.5 * (gs + gs.transpose())).matrixL();
  const Mat ahat = l.transpose() * as * l.transpose().inverse();
  Eigen::JacobiSVD<Mat> svd(ahat);
  return 1.0 / svd.singularValues().minCoeff();
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("Lambert oracle reproduces the characteristic equation") {
  const auto l = oracle::scalar_delay_root(2.0, 1.0, 0.5);
  const auto res = l + 2.0 + 1.0 * std::exp(-l * 0.5);
  CHECK(std::abs(res) < 1e-13);
  CHECK(l.real() == doctest::Approx(-2.205318953636098).epsilon(1e-12));
  CHECK(std::abs(l.imag()) == doctest::Approx(3.005160419389609).epsilon(1e-12));
}

TEST_CASE("scalar delay block converges to the delay root at first order") {
  const auto exact = oracle::scalar_delay_root(2.0, 1.0, 0.5);
  const double e100 = std::abs(dominant(scalar_delay_block(2.0, 1.0, build_delayline(100, 0.5))) - exact);
  const double e200 = std::abs(dominant(scalar_delay_block(2.0, 1.0, build_delayline(200, 0.5))) - exact);
  CHECK(e200 < 2e-2);
  CHECK(e100 / e200 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("complement basis is orthonormal and orthogonal to c") {
  Vec c = Vec::LinSpaced(7, 1.0, 2.0);
  c[3] = -4.0;
  const Mat b = constraint_complement_basis(c);
  CHECK(b.rows() == 7);
  CHECK(b.cols() == 6);
  CHECK((b.transpose() * b - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((c.transpose() * b).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("deflated boundary spectrum") {
  const auto g = boundary(40, 20);
  const auto full = spectrum(g, false);
  CHECK(full.eigenvalues.size() == static_cast<std::size_t>(g.size()));
  const auto rep = spectrum(g, true);
  CHECK(rep.eigenvalues.size() == static_cast<std::size_t>(g.size() - 1));
  CHECK(rep.abscissa < 0.0);
  for (const auto& l : rep.eigenvalues) {
    CHECK(std::abs(l.real()) >= 1e-8);
    if (l.imag() == 0.0) continue;
    bool found = false;
    for (const auto& m : rep.eigenvalues) found = found || m == std::conj(l);
    CHECK(found);
  }
  CHECK(deflated_matrix(g).rows() == g.size() - 1);
}

TEST_CASE("nearly undamped wave modes") {
  const auto g = boundary(100, 10, 1e-6, 5e-7);
  const auto rep = spectrum(g, true);
  for (int k = 1; k <= 3; ++k) {
    double best = 1e300;
    for (const auto& l : rep.eigenvalues) best = std::min(best, std::abs(l - std::complex<double>(0.0, k * M_PI)));
    CHECK(best < 1e-2);
  }
}

TEST_CASE("spectrum refuses oversized problems") {
  const auto g = boundary(40, 20);
  CHECK_THROWS_AS(spectrum(g, true, 50), InputError);
}

TEST_CASE("scalar resolvent") {
  for (auto method : {ResolventEvaluator::Method::Dense, ResolventEvaluator::Method::Sparse}) {
    const ResolventEvaluator r(scalar_block(method == ResolventEvaluator::Method::Sparse), false, method);
    for (double gamma : {0.0, 1.0, 20.0, 200.0}) {
      CHECK(r(gamma) == doctest::Approx(1.0 / std::sqrt(1.0 + gamma * gamma)).epsilon(1e-10));
    }
  }
  auto sw = sweep_and_fit(scalar_block(false), 20.0, 200.0, 20, 1, false);
  CHECK(sw.theta == doctest::Approx(-1.0).epsilon(1e-2));
}

TEST_CASE("dense and sparse resolvent agree") {
  const auto g = boundary(30, 15);
  const ResolventEvaluator dense(g, true, ResolventEvaluator::Method::Dense);
  const ResolventEvaluator sparse(g, true, ResolventEvaluator::Method::Sparse);
  for (double gamma : {0.0, 3.0, 25.0, 150.0}) {
    CHECK(sparse(gamma) == doctest::Approx(dense(gamma)).epsilon(1e-6));
  }
}

TEST_CASE("resolvent at zero matches an independent deflation") {
  const auto g = boundary(20, 10);
  CHECK(resolvent_norm(g, 0.0) == doctest::Approx(resolvent_at_zero_oracle(g)).epsilon(1e-9));
}

TEST_CASE("parallel sweep equals serial sweep") {
  const auto g = boundary(20, 10);
  const auto a = sweep_and_fit(g, 1.0, 50.0, 12, 1);
  const auto b = sweep_and_fit(g, 1.0, 50.0, 12, 3);
  REQUIRE(a.norms.size() == 12);
  for (std::size_t i = 0; i < a.norms.size(); ++i) CHECK(a.norms[i] == b.norms[i]);
  CHECK(a.gammas.front() == doctest::Approx(1.0));
  CHECK(a.gammas.back() == doctest::Approx(50.0));
}

TEST_CASE("trapped square resolvent grows with frequency") {
  const Mesh m = build_rect_mesh(16, 16, 1.0, 1.0, Gamma1Spec::None);
  const auto g = assemble_internal_undelayed(m, damping_strip_field(m, 0.2, 1.0));
  const auto sw = sweep_and_fit(g, 2.0, 20.0, 8);
  CHECK(sw.theta > 0.0);
  CHECK(sw.norms.back() > sw.norms.front());
}

}
