#pragma once

#include <iosfwd>
#include <vector>

#include "dwave/delayline.hpp"
#include "dwave/mesh.hpp"
#include "dwave/params.hpp"
#include "dwave/types.hpp"

namespace dwave {

enum class GeneratorKind { BoundaryDelay, BoundaryUndelayed, InternalDelay, InternalUndelayed };

const char* to_string(GeneratorKind k);
inline bool is_boundary(GeneratorKind k) {
  return k == GeneratorKind::BoundaryDelay || k == GeneratorKind::BoundaryUndelayed;
}
inline bool has_delay_line(GeneratorKind k) {
  return k == GeneratorKind::BoundaryDelay || k == GeneratorKind::InternalDelay;
}

/// Stacked state vector [y; z; u]. The delay line stores rho nodes 1..m_rho
/// for every active node; the inflow node rho = 0 is aliased to z.
struct StateLayout {
  Index n_nodes = 0;
  std::vector<Index> active_nodes;  // mesh nodes carrying a delay line
  int m_rho = 0;                    // 0 without delay line

  Index n_active() const { return static_cast<Index>(active_nodes.size()); }
  Index size() const { return 2 * n_nodes + n_active() * m_rho; }
  Index z_offset() const { return n_nodes; }
  Index u_offset() const { return 2 * n_nodes; }
  /// Position of u(active a, rho_j), j in 1..m_rho.
  Index u_index(Index a, int j) const { return u_offset() + a * m_rho + (j - 1); }

  bool operator==(const StateLayout&) const = default;
};

class WaveState {
 public:
  WaveState() = default;
  explicit WaveState(StateLayout layout);
  WaveState(StateLayout layout, Vec data);

  const StateLayout& layout() const { return layout_; }
  const Vec& vector() const { return data_; }
  Vec& vector() { return data_; }

  auto y() { return data_.segment(0, layout_.n_nodes); }
  auto y() const { return data_.segment(0, layout_.n_nodes); }
  auto z() { return data_.segment(layout_.z_offset(), layout_.n_nodes); }
  auto z() const { return data_.segment(layout_.z_offset(), layout_.n_nodes); }

  /// u(active a, rho_j) for j in 0..m_rho; j == 0 reads z at the active node.
  double u(Index a, int j) const;
  void set_u(Index a, int j, double v);
  /// Delay line outflow u(., 1) over the active nodes.
  Vec outflow() const;

 private:
  StateLayout layout_;
  Vec data_;
};

/// Per-term weights of the quadratic bound used by the dissipation audit:
///   rhs = sum_i z_coeff_i z_i^2 + sum_a um_coeff_a u(a, 1)^2.
struct DissipationBound {
  Vec z_coeff;
  Vec um_coeff;
};

/// Sparse evolution matrix plus the Gram matrix G = gram + varpi c c^T of the
/// weighted inner product, and the conserved linear functional c.
struct DiscreteGenerator {
  GeneratorKind kind = GeneratorKind::BoundaryDelay;
  StateLayout layout;
  SpMat A;
  SpMat gram;
  double varpi = 0.0;
  Vec constraint;
  Vec node_weights;
  DissipationBound bound;

  Index size() const { return layout.size(); }
  /// Constant displacement (1, 0, 0); spans ker A.
  Vec kernel_direction() const;
  Vec apply_gram(const Vec& x) const;
  double inner(const Vec& x, const Vec& w) const;
  double norm(const Vec& x) const;
  /// Materialized G (dense). Only sensible at desk scale.
  Mat dense_gram() const;
  /// Materialized G (sparse; the rank-one term fills the rows it touches).
  SpMat sparse_gram() const;
};

DiscreteGenerator assemble_boundary_generator(const Mesh& m, const BoundaryDelayParams& p,
                                              const DelayLine& dl);
/// beta is ignored; collocated damping only.
DiscreteGenerator assemble_boundary_undelayed(const Mesh& m, const BoundaryDelayParams& p);

/// Delay lines sit on supp(b). b == 0 delegates to assemble_internal_undelayed.
DiscreteGenerator assemble_internal_generator(const Mesh& m, const CoefField& a,
                                              const CoefField& b, double tau, double xi,
                                              const DelayLine& dl);
DiscreteGenerator assemble_internal_undelayed(const Mesh& m, const CoefField& a);

double constraint_functional(const DiscreteGenerator& g, const WaveState& s);
Vec project_mean_zero(const Mesh& m, const Vec& field);
double g_norm(const DiscreteGenerator& g, const WaveState& s);

/// "row col value" per line, zero-based indices.
void write_coo(std::ostream& os, const SpMat& mat);

}  // namespace dwave
