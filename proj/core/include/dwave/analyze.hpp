#pragma once

#include <span>
#include <string>
#include <vector>

#include "dwave/evolve.hpp"
#include "dwave/generator.hpp"

namespace dwave {

enum class DecayModel { Exponential, Polynomial, Logarithmic };
const char* to_string(DecayModel m);

/// Fitted v(t) ~ C exp(-rate t), C t^(-rate) or C log(2+t)^(-rate).
/// All three are fitted as straight lines in (feature(t), log v), so
/// `r_squared` and `rss` live in log space and are comparable across models.
struct DecayFit {
  DecayModel model = DecayModel::Exponential;
  double amplitude = 0.0;
  double rate = 0.0;
  double r_squared = 0.0;
  double rss = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  Index samples = 0;
};

struct FitWindow {
  double t_min = -1.0;  // < 0: default 10% of the last sample time
  double t_max = -1.0;  // < 0: last sample time
  /// Drop samples below floor_ratio * max(v) (round-off floor). 0 keeps all.
  double floor_ratio = 0.0;
};

DecayFit fit_decay(std::span<const double> t, std::span<const double> v, DecayModel model,
                   const FitWindow& window = {});

struct RankedFit {
  std::vector<DecayFit> fits;  // best first
  /// rss of the runner-up over rss of the best (infinite for an exact fit).
  double margin = 0.0;
};

RankedFit classify_decay(std::span<const double> t, std::span<const double> v,
                         const FitWindow& window = {});

enum class EquilibriumKind { BoundaryChi, InternalZeta };

struct Equilibrium {
  EquilibriumKind kind = EquilibriumKind::BoundaryChi;
  double value = 0.0;
  WaveState state;
};

/// chi = [int z0 + (alpha+beta) int_G1 y0 - beta tau int int_G1 f] / ((alpha+beta)|G1|)
/// with mesh and delay-line quadrature.
Equilibrium equilibrium_chi(const Mesh& m, const BoundaryDelayParams& p, const WaveState& s0);

/// zeta = int [z0 + (a+b) y0 - b tau int_0^1 g drho] / int (a+b).
Equilibrium equilibrium_zeta(const Mesh& m, const CoefField& a, const CoefField& b, double tau,
                             const WaveState& s0);

double distance_to_equilibrium(const DiscreteGenerator& g, const WaveState& s,
                               const Equilibrium& eq);

/// Indices of up to `count` samples spaced geometrically in t over [t_lo, t_hi].
std::vector<std::size_t> log_spaced_indices(std::span<const double> t, double t_lo, double t_hi,
                                            std::size_t count);

}  // namespace dwave
