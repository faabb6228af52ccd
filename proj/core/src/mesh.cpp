#include "dwave/mesh.hpp"

#include <cmath>
#include <string>

#include "dwave/errors.hpp"

namespace dwave {

double Mesh::gamma_measure() const {
  double s = 0.0;
  for (const auto& b : boundary_nodes) s += b.weight;
  return s;
}

double Mesh::gamma1_measure() const {
  double s = 0.0;
  for (const auto& b : boundary_nodes) {
    if (b.label == BoundaryLabel::Gamma1) s += b.weight;
  }
  return s;
}

std::vector<BoundaryNode> Mesh::gamma1_nodes() const {
  std::vector<BoundaryNode> out;
  for (const auto& b : boundary_nodes) {
    if (b.label == BoundaryLabel::Gamma1) out.push_back(b);
  }
  return out;
}

bool CoefField::is_zero() const {
  for (bool s : support_mask) {
    if (s) return false;
  }
  return true;
}

CoefField CoefField::from_values(Vec v) {
  CoefField f;
  f.support_mask.resize(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0) {
      throw InputError("coefficient field must be finite and non-negative (node " +
                       std::to_string(i) + ")");
    }
    f.support_mask[static_cast<std::size_t>(i)] = v[i] > 0.0;
  }
  f.values = std::move(v);
  return f;
}

Mesh build_interval_mesh(int n_cells, double length, Gamma1End gamma1_end) {
  if (n_cells < 2) throw InputError("interval mesh needs at least 2 cells");
  if (!(length > 0.0) || !std::isfinite(length)) throw InputError("interval length must be positive");

  Mesh m;
  m.dim = 1;
  m.nx = n_cells;
  m.ny = 0;
  m.lx = length;
  m.h = {length / n_cells, 0.0};
  m.node_coords.resize(static_cast<std::size_t>(n_cells) + 1);
  m.interior_quadrature = Vec::Constant(n_cells + 1, m.h[0]);
  for (int i = 0; i <= n_cells; ++i) {
    m.node_coords[static_cast<std::size_t>(i)] = {length * i / n_cells, 0.0};
  }
  m.interior_quadrature[0] = 0.5 * m.h[0];
  m.interior_quadrature[n_cells] = 0.5 * m.h[0];

  const bool left1 = gamma1_end != Gamma1End::Right;
  const bool right1 = gamma1_end != Gamma1End::Left;
  m.boundary_nodes.push_back(
      {0, left1 ? BoundaryLabel::Gamma1 : BoundaryLabel::Gamma0, 1.0, {-1.0, 0.0}});
  m.boundary_nodes.push_back(
      {n_cells, right1 ? BoundaryLabel::Gamma1 : BoundaryLabel::Gamma0, 1.0, {1.0, 0.0}});
  return m;
}

Mesh build_rect_mesh(int nx, int ny, double lx, double ly, Gamma1Spec gamma1_spec) {
  if (nx < 2 || ny < 2) throw InputError("rectangle mesh needs at least 2 cells per direction");
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw InputError("rectangle side lengths must be positive");
  }

  Mesh m;
  m.dim = 2;
  m.nx = nx;
  m.ny = ny;
  m.lx = lx;
  m.ly = ly;
  m.h = {lx / nx, ly / ny};
  const Index n = static_cast<Index>(nx + 1) * (ny + 1);
  m.node_coords.resize(static_cast<std::size_t>(n));
  m.interior_quadrature.resize(n);
  const auto label =
      gamma1_spec == Gamma1Spec::All ? BoundaryLabel::Gamma1 : BoundaryLabel::Gamma0;

  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const Index k = m.node_index(i, j);
      m.node_coords[static_cast<std::size_t>(k)] = {lx * i / nx, ly * j / ny};
      const bool xb = (i == 0 || i == nx);
      const bool yb = (j == 0 || j == ny);
      m.interior_quadrature[k] = m.h[0] * m.h[1] * (xb ? 0.5 : 1.0) * (yb ? 0.5 : 1.0);
      if (!xb && !yb) continue;

      // Corners take half of each adjacent edge cell.
      double w = 0.0;
      std::array<double, 2> nrm{0.0, 0.0};
      if (xb) {
        w += yb ? 0.5 * m.h[1] : m.h[1];
        nrm[0] = (i == 0) ? -1.0 : 1.0;
      }
      if (yb) {
        w += xb ? 0.5 * m.h[0] : m.h[0];
        nrm[1] = (j == 0) ? -1.0 : 1.0;
      }
      const double len = std::hypot(nrm[0], nrm[1]);
      nrm = {nrm[0] / len, nrm[1] / len};
      m.boundary_nodes.push_back({k, label, w, nrm});
    }
  }
  return m;
}

NeumannLaplacian assemble_neumann_laplacian(const Mesh& m) {
  const Index n = m.num_nodes();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(n) * (m.dim == 1 ? 3 : 5));

  // One axis of the stencil. Mirror ghosts double the inward coupling on the
  // boundary, which keeps W L symmetric.
  auto axis = [&](Index k, int pos, int count, Index stride, double hh) {
    const double c = 1.0 / (hh * hh);
    if (pos == 0) {
      trip.emplace_back(k, k + stride, 2.0 * c);
      trip.emplace_back(k, k, -2.0 * c);
    } else if (pos == count) {
      trip.emplace_back(k, k - stride, 2.0 * c);
      trip.emplace_back(k, k, -2.0 * c);
    } else {
      trip.emplace_back(k, k - stride, c);
      trip.emplace_back(k, k + stride, c);
      trip.emplace_back(k, k, -2.0 * c);
    }
  };

  if (m.dim == 1) {
    for (int i = 0; i <= m.nx; ++i) axis(i, i, m.nx, 1, m.h[0]);
  } else {
    for (int j = 0; j <= m.ny; ++j) {
      for (int i = 0; i <= m.nx; ++i) {
        const Index k = m.node_index(i, j);
        axis(k, i, m.nx, 1, m.h[0]);
        axis(k, j, m.ny, m.nx + 1, m.h[1]);
      }
    }
  }

  NeumannLaplacian out;
  out.laplacian.resize(n, n);
  out.laplacian.setFromTriplets(trip.begin(), trip.end());
  out.laplacian.makeCompressed();

  const auto g1 = m.gamma1_nodes();
  out.gamma1_nodes.reserve(g1.size());
  out.gamma1_weights.resize(static_cast<Index>(g1.size()));
  std::vector<Triplet> ftrip;
  for (std::size_t b = 0; b < g1.size(); ++b) {
    out.gamma1_nodes.push_back(g1[b].node);
    out.gamma1_weights[static_cast<Index>(b)] = g1[b].weight;
    ftrip.emplace_back(g1[b].node, static_cast<Index>(b),
                       g1[b].weight / m.interior_quadrature[g1[b].node]);
  }
  out.flux.resize(n, static_cast<Index>(g1.size()));
  out.flux.setFromTriplets(ftrip.begin(), ftrip.end());

  out.stiffness = -(m.interior_quadrature.asDiagonal() * out.laplacian);
  // Symmetrize exactly: the two triangles agree analytically but may differ in the last bit.
  SpMat kt = out.stiffness.transpose();
  out.stiffness = 0.5 * (out.stiffness + kt);
  out.stiffness.makeCompressed();
  return out;
}

CoefField damping_strip_field(const Mesh& m, double eps, double amplitude) {
  if (!(eps > 0.0 && eps < m.lx)) throw InputError("strip width eps must lie in (0, lx)");
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw InputError("strip amplitude must be non-negative");
  }
  const double cut = eps - 1e-12 * m.lx;
  Vec v = Vec::Zero(m.num_nodes());
  for (Index k = 0; k < m.num_nodes(); ++k) {
    if (m.node_coords[static_cast<std::size_t>(k)][0] < cut) v[k] = amplitude;
  }
  return CoefField::from_values(std::move(v));
}

double integrate(const Mesh& m, const Vec& f) { return m.interior_quadrature.dot(f); }

}  // namespace dwave
