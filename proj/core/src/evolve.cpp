#include "dwave/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dwave/delayline.hpp"
#include "dwave/errors.hpp"

namespace dwave {
namespace {

SpMat identity(Index n) {
  SpMat id(n, n);
  id.setIdentity();
  return id;
}

Index step_count(double dt, double t_end) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw InputError("t_end must be non-negative");
  return static_cast<Index>(std::llround(t_end / dt));
}

}  // namespace

CrankNicolson::CrankNicolson(const SpMat& A, double dt) : dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("dt must be positive");
  const SpMat id = identity(A.rows());
  explicit_ = id + (0.5 * dt) * A;
  SpMat implicit = id - (0.5 * dt) * A;
  implicit.makeCompressed();
  lu_.compute(implicit);
  if (lu_.info() != Eigen::Success) {
    throw NumericalError("factorization of (I - dt/2 A) failed: " + lu_.lastErrorMessage());
  }
}

Vec CrankNicolson::step(const Vec& x) const {
  Vec rhs = explicit_ * x;
  return lu_.solve(rhs);
}

Vec CrankNicolson::step_forced(const Vec& x, const Vec& forcing_sum) const {
  Vec rhs = explicit_ * x + (0.5 * dt_) * forcing_sum;
  return lu_.solve(rhs);
}

WaveState cn_step(const DiscreteGenerator& g, const WaveState& s, double dt) {
  if (!(s.layout() == g.layout)) throw InputError("state layout does not match generator");
  CrankNicolson cn(g.A, dt);
  return WaveState(g.layout, cn.step(s.vector()));
}

DissipationAudit dissipation_audit(const DiscreteGenerator& g, const WaveState& s) {
  if (!(s.layout() == g.layout)) throw InputError("state layout does not match generator");
  const Vec& x = s.vector();
  DissipationAudit out;
  out.lhs = 2.0 * g.inner(x, g.A * x);
  const auto z = s.z();
  out.rhs = g.bound.z_coeff.dot(z.cwiseAbs2());
  if (g.bound.um_coeff.size() > 0) out.rhs += g.bound.um_coeff.dot(s.outflow().cwiseAbs2());
  return out;
}

Trajectory simulate(const DiscreteGenerator& g, const WaveState& s0, double dt, double t_end,
                    const SimulateOptions& opt) {
  if (!(s0.layout() == g.layout)) throw InputError("state layout does not match generator");
  const Index steps = step_count(dt, t_end);
  const CrankNicolson cn(g.A, dt);
  const Vec eq = opt.equilibrium.value_or(Vec::Zero(g.size()));
  if (eq.size() != g.size()) throw InputError("equilibrium size does not match generator");

  Trajectory tr;
  tr.steps = steps;
  tr.trackers.reserve(static_cast<std::size_t>(steps) + 1);

  WaveState s = s0;
  auto record = [&](double t) {
    TrackerRow row;
    row.t = t;
    row.g_norm = g.norm(s.vector());
    row.Q = g.constraint.dot(s.vector());
    row.dist_eq = g.norm(s.vector() - eq);
    if (opt.audit) {
      const auto a = dissipation_audit(g, s);
      row.diss_lhs = a.lhs;
      row.diss_rhs = a.rhs;
      tr.max_audit_excess = std::max(tr.max_audit_excess, a.lhs - a.rhs);
    }
    tr.trackers.push_back(row);
  };

  record(0.0);
  tr.snapshot_times.push_back(0.0);
  tr.snapshots.push_back(s);
  const double q0 = tr.trackers.front().Q;
  const double q_scale = std::max(std::abs(q0), 1e-300);

  for (Index n = 1; n <= steps; ++n) {
    const double prev_norm = tr.trackers.back().g_norm;
    s.vector() = cn.step(s.vector());
    if (!s.vector().allFinite()) {
      throw NumericalError("non-finite state at step " + std::to_string(n));
    }
    const double t = static_cast<double>(n) * dt;
    record(t);
    const auto& row = tr.trackers.back();
    if (prev_norm > 0.0) tr.max_norm_ratio = std::max(tr.max_norm_ratio, row.g_norm / prev_norm);
    tr.max_q_drift = std::max(tr.max_q_drift, std::abs(row.Q - q0) / q_scale);
    if ((opt.snapshot_every > 0 && n % opt.snapshot_every == 0) || n == steps) {
      if (tr.snapshot_times.back() != t) {
        tr.snapshot_times.push_back(t);
        tr.snapshots.push_back(s);
      }
    }
  }
  return tr;
}

double default_dt(const Mesh& m, double tau, int m_rho) {
  double h = m.h[0];
  if (m.dim == 2) h = std::min(h, m.h[1]);
  double dt = 0.5 * h;
  if (m_rho > 0) dt = std::min(dt, tau / m_rho);
  return dt;
}

RingBufferRun simulate_ring_buffer(const Mesh& m, const BoundaryDelayParams& p, double dt,
                                   double t_end, const Vec& y0, const Vec& z0,
                                   const std::function<Vec(double)>& gamma1_history) {
  const Index n = m.num_nodes();
  if (y0.size() != n || z0.size() != n) throw InputError("initial data size does not match mesh");
  const Index steps = step_count(dt, t_end);

  // Wave system with collocated damping; the delayed term enters as forcing.
  const auto g0 = assemble_boundary_undelayed(m, p);
  const auto lap = assemble_neumann_laplacian(m);
  const Index nb = static_cast<Index>(lap.gamma1_nodes.size());
  const CrankNicolson cn(g0.A, dt);
  RingBuffer rb(p.tau, dt, nb, gamma1_history);

  Vec x(2 * n);
  x << y0, z0;
  auto trace = [&](const Vec& state) {
    Vec tr(nb);
    for (Index b = 0; b < nb; ++b) tr[b] = state[n + lap.gamma1_nodes[static_cast<std::size_t>(b)]];
    return tr;
  };
  auto forcing = [&](const Vec& delayed) {
    Vec f = Vec::Zero(2 * n);
    for (Index b = 0; b < nb; ++b) {
      const Index node = lap.gamma1_nodes[static_cast<std::size_t>(b)];
      f[n + node] = -p.beta * lap.gamma1_weights[b] / m.interior_quadrature[node] * delayed[b];
    }
    return f;
  };

  for (Index k = 0; k < steps; ++k) {
    const Vec z_now = trace(x);
    const Vec d_next = rb.peek_next(std::span<const double>(z_now.data(), z_now.size()));
    const Vec d_now = rb.ring_step(std::span<const double>(z_now.data(), z_now.size()));
    x = cn.step_forced(x, forcing(d_now) + forcing(d_next));
    if (!x.allFinite()) throw NumericalError("non-finite ring-buffer state at step " + std::to_string(k + 1));
  }
  return {x.head(n), x.tail(n), steps};
}

}  // namespace dwave
