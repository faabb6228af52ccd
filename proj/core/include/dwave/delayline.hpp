#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dwave/types.hpp"

namespace dwave {

/// Transport representation of a constant delay on rho in [0, 1]:
///   u_t = -u_rho / tau,  u(., 0) = inflow.
/// Nodes rho_j = j / m_rho, j = 0..m_rho. Node 0 carries the inflow and is not
/// an unknown; rows 1..m use first-order upwind differences. The weight
/// 1/m_rho of each cell sits on its downstream node, so
///   sum_j w_j (D u)_j = -(u_m - u_0) / tau
/// holds exactly.
struct DelayLine {
  int m_rho = 0;
  double tau = 0.0;
  Vec rho_nodes;   // m_rho + 1 entries
  Vec quadrature;  // m_rho + 1 entries, quadrature[0] == 0, sum == 1
  /// m_rho x (m_rho + 1) upwind operator acting on [u_0, ..., u_m].
  SpMat transport;

  double drho() const { return 1.0 / m_rho; }
  /// Coefficient 1 / (tau * drho) of the upwind difference.
  double rate() const { return m_rho / tau; }
};

DelayLine build_delayline(int m_rho, double tau);

/// Exact delay by replay: stores `width` traces sampled every dt over the last
/// tau seconds. Requires tau / dt to be an integer.
class RingBuffer {
 public:
  /// `history(s)` returns the trace at time s in [-tau, 0).
  RingBuffer(double tau, double dt, Index width,
             const std::function<Vec(double)>& history);

  Index capacity() const { return capacity_; }
  Index width() const { return width_; }

  /// Returns the trace stored tau seconds ago and pushes `z_now`.
  Vec ring_step(std::span<const double> z_now);

  /// Trace that the next ring_step call will return, i.e. the value at
  /// (now + dt) - tau. `z_now` is needed when the capacity is one slot.
  Vec peek_next(std::span<const double> z_now) const;

 private:
  Index capacity_ = 0;
  Index width_ = 0;
  Index head_ = 0;  // slot holding the oldest trace
  std::vector<double> slots_;
};

}  // namespace dwave
