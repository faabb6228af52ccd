#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dwave/errors.hpp"
#include "dwave/generator.hpp"

using namespace dwave;

namespace {

Vec random_vec(Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

struct BoundaryFixture {
  Mesh mesh = build_interval_mesh(40, 1.0, Gamma1End::Right);
  BoundaryDelayParams p{2.0, 1.0, 0.5, 1.0, 0.0, 1.0};
  DelayLine dl = build_delayline(30, 0.5);
  DiscreteGenerator g;
  BoundaryFixture() {
    p.varpi = default_varpi(p, mesh.omega_measure(), mesh.gamma1_measure());
    g = assemble_boundary_generator(mesh, p, dl);
  }
};

struct InternalFixture {
  Mesh mesh = build_rect_mesh(10, 10, 1.0, 1.0, Gamma1Spec::None);
  CoefField a = damping_strip_field(mesh, 0.2, 1.0);
  CoefField b = CoefField::from_values(0.25 * a.values);
  DelayLine dl = build_delayline(12, 1.0);
  DiscreteGenerator g = assemble_internal_generator(mesh, a, b, 1.0, 1.0, dl);
};

double rhs_of(const DiscreteGenerator& g, const Vec& x) {
  const WaveState s(g.layout, x);
  return g.bound.z_coeff.dot(Vec(s.z()).cwiseAbs2()) + g.bound.um_coeff.dot(s.outflow().cwiseAbs2());
}

}  // namespace

TEST_SUITE("generator") {

TEST_CASE("layout") {
  BoundaryFixture f;
  CHECK(f.g.kind == GeneratorKind::BoundaryDelay);
  CHECK(f.g.layout.n_active() == 1);
  CHECK(f.g.size() == 2 * 41 + 30);
  WaveState s(f.g.layout);
  s.z()[40] = 3.0;
  CHECK(s.u(0, 0) == 3.0);
  s.set_u(0, 30, 5.0);
  CHECK(s.outflow()[0] == 5.0);
}

TEST_CASE("zero state") {
  BoundaryFixture f;
  const Vec zero = Vec::Zero(f.g.size());
  CHECK((f.g.A * zero).norm() == 0.0);
  CHECK(f.g.norm(zero) == 0.0);
}

TEST_CASE("constants are stationary with the rank-one norm") {
  BoundaryFixture f;
  const double c = 1.7;
  WaveState s(f.g.layout);
  s.y().setConstant(c);
  CHECK((f.g.A * s.vector()).cwiseAbs().maxCoeff() < 1e-12);
  const double expected = f.p.varpi * std::pow((f.p.alpha + f.p.beta) * 1.0 * c, 2);
  CHECK(f.g.inner(s.vector(), s.vector()) == doctest::Approx(expected).epsilon(1e-12));
  CHECK((f.g.A * f.g.kernel_direction()).norm() < 1e-12);
}

TEST_CASE("constraint annihilates the generator") {
  BoundaryFixture bf;
  InternalFixture inf;
  for (const DiscreteGenerator* g : {&bf.g, &inf.g}) {
    const Vec ca = SpMat(g->A.transpose()) * g->constraint;
    CHECK(ca.cwiseAbs().maxCoeff() < 1e-12 * g->constraint.cwiseAbs().maxCoeff() * 100);
  }
}

TEST_CASE("Q of a constant displacement") {
  BoundaryFixture f;
  WaveState s(f.g.layout);
  CHECK(constraint_functional(f.g, s) == 0.0);
  s.y().setOnes();
  CHECK(constraint_functional(f.g, s) == doctest::Approx(f.p.alpha + f.p.beta).epsilon(1e-14));
}

TEST_CASE("boundary dissipation bound on random states") {
  BoundaryFixture f;
  for (unsigned seed = 0; seed < 20; ++seed) {
    const Vec x = random_vec(f.g.size(), seed);
    const double lhs = 2.0 * f.g.inner(f.g.A * x, x);
    const double rhs = rhs_of(f.g, x);
    CHECK(rhs <= 0.0);
    CHECK(lhs <= rhs + 1e-10 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("quiet boundary leaves only the varpi cross term") {
  BoundaryFixture f;
  Vec x = random_vec(f.g.size(), 99);
  WaveState s(f.g.layout, x);
  for (const auto& b : f.mesh.gamma1_nodes()) s.z()[b.node] = 0.0;
  s.set_u(0, f.dl.m_rho, 0.0);
  CHECK(rhs_of(f.g, s.vector()) == 0.0);
  CHECK(2.0 * f.g.inner(f.g.A * s.vector(), s.vector()) <= 1e-10);
}

TEST_CASE("internal dissipation bound on random states") {
  InternalFixture f;
  CHECK(f.g.kind == GeneratorKind::InternalDelay);
  CHECK(f.g.layout.n_active() == 22);
  for (unsigned seed = 0; seed < 20; ++seed) {
    const Vec x = random_vec(f.g.size(), seed + 100);
    const double lhs = 2.0 * f.g.inner(f.g.A * x, x);
    const double rhs = rhs_of(f.g, x);
    CHECK(rhs <= 0.0);
    CHECK(lhs <= rhs + 1e-10 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("b = 0 delegates to the undelayed generator") {
  InternalFixture f;
  const CoefField zero = CoefField::from_values(Vec::Zero(f.mesh.num_nodes()));
  const auto g = assemble_internal_generator(f.mesh, f.a, zero, 1.0, 1.0, f.dl);
  CHECK(g.kind == GeneratorKind::InternalUndelayed);
  CHECK(g.size() == 2 * f.mesh.num_nodes());
  CHECK_FALSE(has_delay_line(g.kind));
}

TEST_CASE("internal window enforced") {
  InternalFixture f;
  CHECK_THROWS_AS(assemble_internal_generator(f.mesh, f.a, f.b, 1.0, 0.1, f.dl), ParameterError);
  CHECK_THROWS_AS(assemble_internal_generator(f.mesh, f.a, f.b, 1.0, 1.9, f.dl), ParameterError);
}

TEST_CASE("invalid boundary params quote the inequality") {
  const Mesh m = build_interval_mesh(10, 1.0, Gamma1End::Right);
  BoundaryDelayParams p{2.0, 1.0, 0.5, 0.5, 0.05, 1.0};
  try {
    assemble_boundary_generator(m, p, build_delayline(10, 0.5));
    FAIL("expected ParameterError");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("xi must exceed tau*beta") != std::string::npos);
  }
  const Mesh closed = build_rect_mesh(4, 4, 1.0, 1.0, Gamma1Spec::None);
  p.xi = 1.0;
  CHECK_THROWS_AS(assemble_boundary_generator(closed, p, build_delayline(10, 0.5)), AssemblyError);
}

TEST_CASE("Gram specializations") {
  BoundaryFixture f;
  f.p.varpi = 1e-3;
  const auto g = assemble_boundary_generator(f.mesh, f.p, f.dl);
  const Vec x = random_vec(g.size(), 5);
  const WaveState s(g.layout, x);
  const auto lap = assemble_neumann_laplacian(f.mesh);
  const Vec& w = f.mesh.interior_quadrature;
  double delay = 0.0;
  for (int j = 1; j <= f.dl.m_rho; ++j) delay += f.dl.quadrature[j] * s.u(0, j) * s.u(0, j);
  const Vec y = s.y();
  const Vec z = s.z();
  const double base = y.dot(lap.stiffness * y) + w.dot(z.cwiseAbs2()) + f.p.xi * 1.0 * delay;
  CHECK(x.dot(g.gram * x) == doctest::Approx(base).epsilon(1e-12));
  const double q = g.constraint.dot(x);
  CHECK(g.inner(x, x) == doctest::Approx(base + f.p.varpi * q * q).epsilon(1e-12));
  CHECK((g.dense_gram() - Mat(g.sparse_gram())).cwiseAbs().maxCoeff() < 1e-12);

  InternalFixture in;
  WaveState zs(in.g.layout);
  zs.z() = random_vec(in.mesh.num_nodes(), 6);
  const Vec zz = zs.z();
  CHECK(in.g.inner(zs.vector(), zs.vector()) ==
        doctest::Approx(in.mesh.interior_quadrature.dot(zz.cwiseAbs2())).epsilon(1e-13));
}

TEST_CASE("Gram is positive definite on sampled states") {
  BoundaryFixture f;
  for (unsigned seed = 0; seed < 10; ++seed) {
    const Vec x = random_vec(f.g.size(), 200 + seed);
    CHECK(f.g.inner(x, x) > 0.0);
  }
}

TEST_CASE("mean-zero projection") {
  const Mesh m = build_rect_mesh(6, 4, 1.5, 1.0, Gamma1Spec::All);
  CHECK(project_mean_zero(m, Vec::Constant(m.num_nodes(), 2.0)).cwiseAbs().maxCoeff() < 1e-15);
  const Vec r = random_vec(m.num_nodes(), 7);
  const Vec p = project_mean_zero(m, r);
  CHECK(std::abs(m.interior_quadrature.dot(p)) < 1e-14);
  CHECK((project_mean_zero(m, p) - p).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("COO export") {
  SpMat a(2, 3);
  a.insert(1, 2) = 0.5;
  std::ostringstream os;
  write_coo(os, a);
  CHECK(os.str().find("1 2 0.5") != std::string::npos);
}

}
