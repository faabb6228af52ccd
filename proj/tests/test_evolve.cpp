#include <doctest.h>

#include <cmath>

#include "dwave/analyze.hpp"
#include "dwave/errors.hpp"
#include "dwave/evolve.hpp"

using namespace dwave;

namespace {

struct Boundary1D {
  Mesh mesh;
  BoundaryDelayParams p{2.0, 1.0, 0.5, 1.0, 0.0, 1.0};
  DelayLine dl;
  DiscreteGenerator g;
  explicit Boundary1D(int n = 40, int m_rho = 20)
      : mesh(build_interval_mesh(n, 1.0, Gamma1End::Right)), dl(build_delayline(m_rho, 0.5)) {
    p.varpi = default_varpi(p, mesh.omega_measure(), mesh.gamma1_measure());
    g = assemble_boundary_generator(mesh, p, dl);
  }
  WaveState bump() const {
    WaveState s(g.layout);
    for (Index i = 0; i < mesh.num_nodes(); ++i) {
      const double x = mesh.node_coords[i][0];
      s.y()[i] = std::exp(-(x - 0.5) * (x - 0.5) / 0.02);
    }
    s.z().setOnes();
    return s;
  }
};

}  // namespace

TEST_SUITE("evolve") {

TEST_CASE("zero generator is the identity") {
  SpMat zero(3, 3);
  CrankNicolson cn(zero, 0.1);
  const Vec x = Vec::LinSpaced(3, 1.0, 3.0);
  CHECK((cn.step(x) - x).norm() == 0.0);
}

TEST_CASE("scalar Cayley map") {
  const double lambda = 3.0, dt = 0.2;
  SpMat a(1, 1);
  a.insert(0, 0) = -lambda;
  CrankNicolson cn(a, dt);
  const Vec x = Vec::Constant(1, 2.0);
  const double ratio = (1.0 - dt * lambda / 2.0) / (1.0 + dt * lambda / 2.0);
  CHECK(cn.step(x)[0] == doctest::Approx(2.0 * ratio).epsilon(1e-15));
  CHECK(std::abs(ratio) < 1.0);
}

TEST_CASE("one step preserves Q") {
  Boundary1D f;
  const WaveState s = f.bump();
  const WaveState s1 = cn_step(f.g, s, 0.01);
  const double q0 = constraint_functional(f.g, s);
  CHECK(std::abs(constraint_functional(f.g, s1) - q0) <= 1e-12 * std::abs(q0));
}

TEST_CASE("equilibrium direction is stationary") {
  Boundary1D f;
  WaveState s(f.g.layout);
  s.y().setConstant(0.8);
  SimulateOptions opt;
  opt.snapshot_every = 10;
  const auto tr = simulate(f.g, s, 0.01, 1.0, opt);
  for (const auto& snap : tr.snapshots) CHECK((snap.vector() - s.vector()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("Q = 0 data decays in norm") {
  Boundary1D f;
  WaveState s = f.bump();
  const auto eq = equilibrium_chi(f.mesh, f.p, s);
  s.vector() -= eq.state.vector();
  CHECK(std::abs(constraint_functional(f.g, s)) < 1e-12);
  const double dt = default_dt(f.mesh, f.p.tau, f.dl.m_rho);
  SimulateOptions opt;
  opt.audit = false;
  const auto tr = simulate(f.g, s, dt, 200.0, opt);
  CHECK(tr.trackers.back().g_norm < 1e-3 * tr.trackers.front().g_norm);
  CHECK(tr.max_norm_ratio <= 1.0 + 1e-12);
}

TEST_CASE("second order in dt") {
  Boundary1D f(20, 10);
  const WaveState s = f.bump();
  auto run = [&](double dt) {
    SimulateOptions opt;
    opt.audit = false;
    return simulate(f.g, s, dt, 1.0, opt).snapshots.back().vector();
  };
  const Vec x1 = run(0.02), x2 = run(0.01), x3 = run(0.005);
  const double ratio = (x1 - x2).norm() / (x2 - x3).norm();
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("trackers and audit") {
  Boundary1D f;
  const WaveState s = f.bump();
  const auto eq = equilibrium_chi(f.mesh, f.p, s);
  SimulateOptions opt;
  opt.equilibrium = eq.state.vector();
  const auto tr = simulate(f.g, s, 0.0125, 5.0, opt);
  CHECK(tr.steps == 400);
  CHECK(tr.trackers.size() == 401);
  CHECK(tr.trackers.front().t == 0.0);
  CHECK(tr.trackers.back().t == doctest::Approx(5.0));
  CHECK(tr.max_audit_excess <= 1e-10);
  CHECK(tr.max_q_drift <= 1e-12);
  for (std::size_t i = 1; i < tr.trackers.size(); ++i) {
    CHECK(tr.trackers[i].dist_eq <= tr.trackers[i - 1].dist_eq * (1.0 + 1e-12) + 1e-15);
  }
}

TEST_CASE("undamped scheme is time reversible") {
  const Mesh m = build_rect_mesh(12, 12, 1.0, 1.0, Gamma1Spec::None);
  const auto g = assemble_internal_undelayed(m, CoefField::from_values(Vec::Zero(m.num_nodes())));
  Vec x = Vec::Zero(g.size());
  for (Index i = 0; i < m.num_nodes(); ++i) {
    x[i] = std::sin(3.0 * m.node_coords[i][0]) * std::cos(2.0 * m.node_coords[i][1]);
    x[m.num_nodes() + i] = m.node_coords[i][0] * m.node_coords[i][1];
  }
  const CrankNicolson forward(g.A, 0.01);
  const CrankNicolson backward(-g.A, 0.01);
  Vec y = x;
  for (int k = 0; k < 50; ++k) y = forward.step(y);
  for (int k = 0; k < 50; ++k) y = backward.step(y);
  CHECK((y - x).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("dissipation audit on the zero state") {
  Boundary1D f;
  const auto a = dissipation_audit(f.g, WaveState(f.g.layout));
  CHECK(a.lhs == 0.0);
  CHECK(a.rhs == 0.0);
}

TEST_CASE("default dt") {
  const Mesh m = build_interval_mesh(400, 1.0, Gamma1End::Right);
  CHECK(default_dt(m, 0.5, 200) == doctest::Approx(1.0 / 800.0));
  CHECK(default_dt(m, 0.5, 0) == doctest::Approx(1.0 / 800.0));
  CHECK(default_dt(build_interval_mesh(10, 1.0, Gamma1End::Right), 0.5, 200) == doctest::Approx(0.5 / 200.0));
}

TEST_CASE("bad inputs") {
  Boundary1D f;
  CHECK_THROWS_AS(simulate(f.g, f.bump(), -1.0, 1.0), InputError);
  Boundary1D other(20, 10);
  CHECK_THROWS_AS(simulate(f.g, other.bump(), 0.1, 1.0), InputError);
}

}
