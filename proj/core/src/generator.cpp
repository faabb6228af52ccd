#include "dwave/generator.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "dwave/errors.hpp"

namespace dwave {

const char* to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::BoundaryDelay: return "boundary_delay";
    case GeneratorKind::BoundaryUndelayed: return "boundary_undelayed";
    case GeneratorKind::InternalDelay: return "internal_delay";
    case GeneratorKind::InternalUndelayed: return "internal_undelayed";
  }
  return "unknown";
}

WaveState::WaveState(StateLayout layout)
    : layout_(std::move(layout)), data_(Vec::Zero(layout_.size())) {}

WaveState::WaveState(StateLayout layout, Vec data)
    : layout_(std::move(layout)), data_(std::move(data)) {
  if (data_.size() != layout_.size()) throw InputError("state vector does not match layout");
}

double WaveState::u(Index a, int j) const {
  if (j == 0) return data_[layout_.z_offset() + layout_.active_nodes[static_cast<std::size_t>(a)]];
  return data_[layout_.u_index(a, j)];
}

void WaveState::set_u(Index a, int j, double v) {
  if (j == 0) {
    data_[layout_.z_offset() + layout_.active_nodes[static_cast<std::size_t>(a)]] = v;
  } else {
    data_[layout_.u_index(a, j)] = v;
  }
}

Vec WaveState::outflow() const {
  Vec out(layout_.n_active());
  for (Index a = 0; a < layout_.n_active(); ++a) out[a] = u(a, layout_.m_rho);
  return out;
}

Vec DiscreteGenerator::kernel_direction() const {
  Vec k = Vec::Zero(size());
  k.head(layout.n_nodes).setOnes();
  return k;
}

Vec DiscreteGenerator::apply_gram(const Vec& x) const {
  Vec out = gram * x;
  if (varpi != 0.0) out += (varpi * constraint.dot(x)) * constraint;
  return out;
}

double DiscreteGenerator::inner(const Vec& x, const Vec& w) const {
  double v = x.dot(gram * w);
  if (varpi != 0.0) v += varpi * constraint.dot(x) * constraint.dot(w);
  return v;
}

double DiscreteGenerator::norm(const Vec& x) const { return std::sqrt(std::max(0.0, inner(x, x))); }

Mat DiscreteGenerator::dense_gram() const {
  Mat g = Mat(gram);
  if (varpi != 0.0) g += varpi * constraint * constraint.transpose();
  return g;
}

SpMat DiscreteGenerator::sparse_gram() const {
  if (varpi == 0.0) return gram;
  std::vector<Triplet> trip;
  for (Index c = 0; c < gram.outerSize(); ++c) {
    for (SpMat::InnerIterator it(gram, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  }
  std::vector<Index> nz;
  for (Index i = 0; i < constraint.size(); ++i) {
    if (constraint[i] != 0.0) nz.push_back(i);
  }
  for (Index i : nz) {
    for (Index j : nz) trip.emplace_back(i, j, varpi * constraint[i] * constraint[j]);
  }
  SpMat g(size(), size());
  g.setFromTriplets(trip.begin(), trip.end());
  return g;
}

namespace {

// Blocks shared by every kind: y' = z, z' = L y, gradient/L2 Gram blocks.
struct Assembly {
  StateLayout layout;
  std::vector<Triplet> a;
  std::vector<Triplet> g;

  void wave_blocks(const NeumannLaplacian& lap, const Vec& w) {
    const Index n = layout.n_nodes;
    const Index zo = layout.z_offset();
    for (Index i = 0; i < n; ++i) a.emplace_back(i, zo + i, 1.0);
    for (Index c = 0; c < lap.laplacian.outerSize(); ++c) {
      for (SpMat::InnerIterator it(lap.laplacian, c); it; ++it) {
        a.emplace_back(zo + it.row(), it.col(), it.value());
      }
    }
    for (Index c = 0; c < lap.stiffness.outerSize(); ++c) {
      for (SpMat::InnerIterator it(lap.stiffness, c); it; ++it) {
        g.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (Index i = 0; i < n; ++i) g.emplace_back(zo + i, zo + i, w[i]);
  }

  // Upwind transport along every active delay line, inflow aliased to z.
  // `weight[a]` is the spatial quadrature weight of active node a.
  void delay_blocks(const DelayLine& dl, const Vec& weight, double xi) {
    const double c = dl.rate();
    const double drho = dl.drho();
    const Index zo = layout.z_offset();
    for (Index act = 0; act < layout.n_active(); ++act) {
      const Index node = layout.active_nodes[static_cast<std::size_t>(act)];
      for (int j = 1; j <= dl.m_rho; ++j) {
        const Index row = layout.u_index(act, j);
        const Index prev = (j == 1) ? zo + node : layout.u_index(act, j - 1);
        a.emplace_back(row, row, -c);
        a.emplace_back(row, prev, c);
        g.emplace_back(row, row, xi * weight[act] * drho);
      }
    }
  }

  DiscreteGenerator finish(GeneratorKind kind, Vec constraint, double varpi, Vec w) {
    DiscreteGenerator out;
    out.kind = kind;
    out.layout = layout;
    const Index n = layout.size();
    out.A.resize(n, n);
    out.A.setFromTriplets(a.begin(), a.end());
    out.A.makeCompressed();
    out.gram.resize(n, n);
    out.gram.setFromTriplets(g.begin(), g.end());
    out.gram.makeCompressed();
    out.constraint = std::move(constraint);
    out.varpi = varpi;
    out.node_weights = std::move(w);
    return out;
  }
};

void check_mesh_gamma1(const NeumannLaplacian& lap) {
  if (lap.gamma1_nodes.empty()) throw AssemblyError("boundary generator needs a nonempty Gamma1");
}

}  // namespace

DiscreteGenerator assemble_boundary_generator(const Mesh& m, const BoundaryDelayParams& p,
                                              const DelayLine& dl) {
  const auto lap = assemble_neumann_laplacian(m);
  check_mesh_gamma1(lap);
  const auto report = validate_boundary_params(p, m.omega_measure(), m.gamma1_measure());
  if (const auto* bad = report.first_violation()) {
    throw ParameterError("invalid boundary parameters: " + bad->inequality);
  }
  if (std::abs(dl.tau - p.tau) > 1e-14 * p.tau) throw InputError("delay line tau differs from params");

  const Vec& w = m.interior_quadrature;
  Assembly as;
  as.layout.n_nodes = m.num_nodes();
  as.layout.active_nodes = lap.gamma1_nodes;
  as.layout.m_rho = dl.m_rho;
  as.wave_blocks(lap, w);
  as.delay_blocks(dl, lap.gamma1_weights, p.xi);

  // Robin flux dy/dnu = -alpha z - beta u(., 1) through the flux slots.
  const Index zo = as.layout.z_offset();
  for (Index b = 0; b < as.layout.n_active(); ++b) {
    const Index node = lap.gamma1_nodes[static_cast<std::size_t>(b)];
    const double f = lap.gamma1_weights[b] / w[node];
    as.a.emplace_back(zo + node, zo + node, -p.alpha * f);
    as.a.emplace_back(zo + node, as.layout.u_index(b, dl.m_rho), -p.beta * f);
  }

  Vec c = Vec::Zero(as.layout.size());
  c.segment(zo, m.num_nodes()) = w;
  const double drho = dl.drho();
  for (Index b = 0; b < as.layout.n_active(); ++b) {
    const Index node = lap.gamma1_nodes[static_cast<std::size_t>(b)];
    const double wb = lap.gamma1_weights[b];
    c[node] += (p.alpha + p.beta) * wb;
    for (int j = 1; j <= dl.m_rho; ++j) c[as.layout.u_index(b, j)] = -p.beta * p.tau * wb * drho;
  }

  DissipationBound bound;
  bound.z_coeff = Vec::Zero(m.num_nodes());
  bound.um_coeff.resize(as.layout.n_active());
  const double xr = p.xi / p.tau;
  for (Index b = 0; b < as.layout.n_active(); ++b) {
    const Index node = lap.gamma1_nodes[static_cast<std::size_t>(b)];
    const double wb = lap.gamma1_weights[b];
    bound.z_coeff[node] = -(2.0 * p.alpha - p.beta - xr) * wb;
    bound.um_coeff[b] = -(xr - p.beta) * wb;
  }

  auto out = as.finish(GeneratorKind::BoundaryDelay, std::move(c), p.varpi, w);
  out.bound = std::move(bound);
  return out;
}

DiscreteGenerator assemble_boundary_undelayed(const Mesh& m, const BoundaryDelayParams& p) {
  const auto lap = assemble_neumann_laplacian(m);
  check_mesh_gamma1(lap);
  if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) throw ParameterError("alpha must be positive");
  if (!(p.varpi >= 0.0)) throw ParameterError("varpi must be non-negative");

  const Vec& w = m.interior_quadrature;
  Assembly as;
  as.layout.n_nodes = m.num_nodes();
  as.wave_blocks(lap, w);
  const Index zo = as.layout.z_offset();
  Vec c = Vec::Zero(as.layout.size());
  c.segment(zo, m.num_nodes()) = w;
  DissipationBound bound;
  bound.z_coeff = Vec::Zero(m.num_nodes());
  for (std::size_t b = 0; b < lap.gamma1_nodes.size(); ++b) {
    const Index node = lap.gamma1_nodes[b];
    const double wb = lap.gamma1_weights[static_cast<Index>(b)];
    as.a.emplace_back(zo + node, zo + node, -p.alpha * wb / w[node]);
    c[node] += p.alpha * wb;
    bound.z_coeff[node] = -2.0 * p.alpha * wb;
  }
  auto out = as.finish(GeneratorKind::BoundaryUndelayed, std::move(c), p.varpi, w);
  out.bound = std::move(bound);
  return out;
}

DiscreteGenerator assemble_internal_undelayed(const Mesh& m, const CoefField& a) {
  if (a.values.size() != m.num_nodes()) throw InputError("damping field size mismatch");
  if ((a.values.array() < 0.0).any()) throw InputError("damping field a must be non-negative");
  const auto lap = assemble_neumann_laplacian(m);
  const Vec& w = m.interior_quadrature;
  Assembly as;
  as.layout.n_nodes = m.num_nodes();
  as.wave_blocks(lap, w);
  const Index zo = as.layout.z_offset();
  for (Index i = 0; i < m.num_nodes(); ++i) {
    if (a.values[i] != 0.0) as.a.emplace_back(zo + i, zo + i, -a.values[i]);
  }
  Vec c = Vec::Zero(as.layout.size());
  c.head(m.num_nodes()) = w.cwiseProduct(a.values);
  c.segment(zo, m.num_nodes()) = w;
  DissipationBound bound;
  bound.z_coeff = -2.0 * w.cwiseProduct(a.values);
  auto out = as.finish(GeneratorKind::InternalUndelayed, std::move(c), 0.0, w);
  out.bound = std::move(bound);
  return out;
}

DiscreteGenerator assemble_internal_generator(const Mesh& m, const CoefField& a,
                                              const CoefField& b, double tau, double xi,
                                              const DelayLine& dl) {
  if (a.values.size() != m.num_nodes() || b.values.size() != m.num_nodes()) {
    throw InputError("damping field size mismatch");
  }
  if ((a.values.array() < 0.0).any() || (b.values.array() < 0.0).any()) {
    throw InputError("damping fields a and b must be non-negative");
  }
  if (b.is_zero()) return assemble_internal_undelayed(m, a);

  const auto report = validate_internal_params({a.sup_norm(), b.sup_norm(), tau, xi});
  if (const auto* bad = report.first_violation()) {
    throw ParameterError("invalid internal parameters: " + bad->inequality);
  }
  if (std::abs(dl.tau - tau) > 1e-14 * tau) throw InputError("delay line tau differs from params");

  const auto lap = assemble_neumann_laplacian(m);
  const Vec& w = m.interior_quadrature;
  Assembly as;
  as.layout.n_nodes = m.num_nodes();
  as.layout.m_rho = dl.m_rho;
  for (Index i = 0; i < m.num_nodes(); ++i) {
    if (b.values[i] > 0.0) {
      // The window has to hold at every node where the delay acts.
      const double bi = b.values[i];
      const double ai = a.values[i];
      if (!(tau * bi < xi && xi < tau * (2.0 * ai - bi))) {
        throw ParameterError("invalid internal parameters: tau*b(x) < xi < tau*(2a(x) - b(x)) fails at node " +
                             std::to_string(i));
      }
      as.layout.active_nodes.push_back(i);
    }
  }
  Vec wa(as.layout.n_active());
  for (Index k = 0; k < wa.size(); ++k) wa[k] = w[as.layout.active_nodes[static_cast<std::size_t>(k)]];

  as.wave_blocks(lap, w);
  as.delay_blocks(dl, wa, xi);
  const Index zo = as.layout.z_offset();
  for (Index i = 0; i < m.num_nodes(); ++i) {
    if (a.values[i] != 0.0) as.a.emplace_back(zo + i, zo + i, -a.values[i]);
  }
  for (Index k = 0; k < as.layout.n_active(); ++k) {
    const Index node = as.layout.active_nodes[static_cast<std::size_t>(k)];
    as.a.emplace_back(zo + node, as.layout.u_index(k, dl.m_rho), -b.values[node]);
  }

  Vec c = Vec::Zero(as.layout.size());
  c.head(m.num_nodes()) = w.cwiseProduct(a.values + b.values);
  c.segment(zo, m.num_nodes()) = w;
  const double drho = dl.drho();
  for (Index k = 0; k < as.layout.n_active(); ++k) {
    const Index node = as.layout.active_nodes[static_cast<std::size_t>(k)];
    for (int j = 1; j <= dl.m_rho; ++j) {
      c[as.layout.u_index(k, j)] = -tau * b.values[node] * w[node] * drho;
    }
  }

  // Pointwise form of 2Re<AZ,Z> <= [b - 2a + xi/tau]|z|^2 + [b - xi/tau]|u(1)|^2.
  DissipationBound bound;
  bound.z_coeff = w.cwiseProduct(b.values - 2.0 * a.values);
  bound.um_coeff.resize(as.layout.n_active());
  const double xr = xi / tau;
  for (Index k = 0; k < as.layout.n_active(); ++k) {
    const Index node = as.layout.active_nodes[static_cast<std::size_t>(k)];
    bound.z_coeff[node] += w[node] * xr;
    bound.um_coeff[k] = w[node] * (b.values[node] - xr);
  }

  auto out = as.finish(GeneratorKind::InternalDelay, std::move(c), 0.0, w);
  out.bound = std::move(bound);
  return out;
}

double constraint_functional(const DiscreteGenerator& g, const WaveState& s) {
  if (!(s.layout() == g.layout)) throw InputError("state layout does not match generator");
  return g.constraint.dot(s.vector());
}

Vec project_mean_zero(const Mesh& m, const Vec& field) {
  if (field.size() != m.num_nodes()) throw InputError("field size does not match mesh");
  const double mean = m.interior_quadrature.dot(field) / m.omega_measure();
  return field.array() - mean;
}

double g_norm(const DiscreteGenerator& g, const WaveState& s) {
  if (!(s.layout() == g.layout)) throw InputError("state layout does not match generator");
  return g.norm(s.vector());
}

void write_coo(std::ostream& os, const SpMat& mat) {
  os << std::setprecision(17);
  for (Index c = 0; c < mat.outerSize(); ++c) {
    for (SpMat::InnerIterator it(mat, c); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace dwave
