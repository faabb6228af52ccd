#pragma once

#include <array>
#include <vector>

#include "dwave/types.hpp"

namespace dwave {

enum class BoundaryLabel { Gamma0, Gamma1 };
enum class Gamma1End { Left, Right, Both };
enum class Gamma1Spec { All, None };

struct BoundaryNode {
  Index node = 0;
  BoundaryLabel label = BoundaryLabel::Gamma0;
  double weight = 0.0;              // boundary quadrature weight
  std::array<double, 2> normal{};  // outward unit normal (averaged at corners)
};

/// Uniform 1D interval or 2D rectangle grid. Every grid point is an unknown,
/// including boundary points; trapezoidal cell measures give the interior
/// quadrature.
struct Mesh {
  int dim = 1;
  int nx = 0;  // cells along x
  int ny = 0;  // cells along y (0 in 1D)
  double lx = 1.0;
  double ly = 0.0;
  std::array<double, 2> h{};
  std::vector<std::array<double, 2>> node_coords;
  Vec interior_quadrature;
  std::vector<BoundaryNode> boundary_nodes;

  Index num_nodes() const { return static_cast<Index>(node_coords.size()); }
  Index node_index(int i, int j = 0) const { return static_cast<Index>(j) * (nx + 1) + i; }

  double omega_measure() const { return interior_quadrature.sum(); }
  double gamma_measure() const;
  double gamma1_measure() const;
  /// Boundary entries labelled Gamma1, in node order.
  std::vector<BoundaryNode> gamma1_nodes() const;
};

/// Per-node coefficient a(x) or b(x) and its support set.
struct CoefField {
  Vec values;
  std::vector<bool> support_mask;

  double sup_norm() const { return values.size() ? values.maxCoeff() : 0.0; }
  bool is_zero() const;
  /// Builds a field from values, deriving the support. Throws InputError on negative entries.
  static CoefField from_values(Vec v);
};

Mesh build_interval_mesh(int n_cells, double length, Gamma1End gamma1_end);
Mesh build_rect_mesh(int nx, int ny, double lx, double ly, Gamma1Spec gamma1_spec);

/// Discrete Neumann Laplacian with mirror-ghost closure.
///   laplacian  : (L y)_i, homogeneous Neumann everywhere
///   flux       : N x |Gamma1| map injecting a prescribed outward flux g_b, so
///                that L y + flux * g realises dy/dnu = g on Gamma1
///   stiffness  : K = -W L, symmetric positive semidefinite (W = diag(weights))
/// With these, sum_i w_i (L y + flux g)_i = sum_b w_b g_b holds exactly.
struct NeumannLaplacian {
  SpMat laplacian;
  SpMat flux;
  SpMat stiffness;
  std::vector<Index> gamma1_nodes;
  Vec gamma1_weights;
};

NeumannLaplacian assemble_neumann_laplacian(const Mesh& m);

/// amplitude on nodes with x < eps, zero elsewhere.
CoefField damping_strip_field(const Mesh& m, double eps, double amplitude);

/// Quadrature integral sum_i w_i f_i.
double integrate(const Mesh& m, const Vec& f);

}  // namespace dwave
