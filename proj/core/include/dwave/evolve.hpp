#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/SparseLU>

#include "dwave/generator.hpp"

namespace dwave {

/// Per time level diagnostics.
struct TrackerRow {
  double t = 0.0;
  double g_norm = 0.0;
  double Q = 0.0;
  double dist_eq = 0.0;
  double diss_lhs = 0.0;
  double diss_rhs = 0.0;
};

struct Trajectory {
  std::vector<double> snapshot_times;
  std::vector<WaveState> snapshots;
  /// One row per time level, starting at t = 0.
  std::vector<TrackerRow> trackers;

  Index steps = 0;
  double max_norm_ratio = 0.0;  // max over steps of |x_{n+1}|_G / |x_n|_G
  double max_q_drift = 0.0;     // max relative |Q_n - Q_0|
  double max_audit_excess = 0.0;  // max (lhs - rhs), should stay <= 0
};

/// Trapezoidal (Cayley) propagator (I - dt/2 A)^{-1} (I + dt/2 A), factorized once.
class CrankNicolson {
 public:
  CrankNicolson(const SpMat& A, double dt);

  double dt() const { return dt_; }
  Vec step(const Vec& x) const;
  /// Adds dt/2 * (f_now + f_next) to the explicit half before solving.
  Vec step_forced(const Vec& x, const Vec& forcing_sum) const;

 private:
  double dt_;
  SpMat explicit_;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
};

WaveState cn_step(const DiscreteGenerator& g, const WaveState& s, double dt);

struct SimulateOptions {
  /// Equilibrium to measure against; zero vector when absent.
  std::optional<Vec> equilibrium;
  /// Store a snapshot every this many steps (0: initial and final only).
  Index snapshot_every = 0;
  bool audit = true;
};

/// Integrates x' = A x from s0 up to t_end. Throws NumericalError on NaN.
Trajectory simulate(const DiscreteGenerator& g, const WaveState& s0, double dt, double t_end,
                    const SimulateOptions& opt = {});

struct DissipationAudit {
  double lhs = 0.0;  // 2 x^T G A x = d/dt |x|_G^2
  double rhs = 0.0;  // quadratic damping bound
};

DissipationAudit dissipation_audit(const DiscreteGenerator& g, const WaveState& s);

/// min(h/2, tau/m_rho); h is the smallest grid spacing. m_rho <= 0 ignores the delay term.
double default_dt(const Mesh& m, double tau, int m_rho);

/// Boundary-delay wave system with the delayed trace replayed exactly from a
/// ring buffer instead of a transport line. Returns (y, z) at t_end.
struct RingBufferRun {
  Vec y;
  Vec z;
  Index steps = 0;
};

RingBufferRun simulate_ring_buffer(const Mesh& m, const BoundaryDelayParams& p, double dt,
                                   double t_end, const Vec& y0, const Vec& z0,
                                   const std::function<Vec(double)>& gamma1_history);

}  // namespace dwave
