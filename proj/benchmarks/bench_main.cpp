#include <benchmark/benchmark.h>

#include "dwave/evolve.hpp"
#include "dwave/spectral.hpp"

using namespace dwave;

namespace {

DiscreteGenerator boundary(int n, int m_rho) {
  const Mesh m = build_interval_mesh(n, 1.0, Gamma1End::Right);
  BoundaryDelayParams p{2.0, 1.0, 0.5, 1.0, 0.0, 1.0};
  p.varpi = default_varpi(p, m.omega_measure(), m.gamma1_measure());
  return assemble_boundary_generator(m, p, build_delayline(m_rho, 0.5));
}

DiscreteGenerator trapped(int n) {
  const Mesh m = build_rect_mesh(n, n, 1.0, 1.0, Gamma1Spec::None);
  const CoefField a = damping_strip_field(m, 0.2, 1.0);
  const CoefField b = CoefField::from_values(0.1 * a.values);
  return assemble_internal_generator(m, a, b, 1.0, 1.0, build_delayline(20, 1.0));
}

void BM_AssembleBoundary(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(boundary(n, n / 2));
}
BENCHMARK(BM_AssembleBoundary)->Arg(100)->Arg(400)->Arg(1600);

void BM_AssembleTrapped(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(trapped(n));
}
BENCHMARK(BM_AssembleTrapped)->Arg(20)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_CrankNicolsonStep(benchmark::State& state) {
  const auto g = trapped(static_cast<int>(state.range(0)));
  const CrankNicolson cn(g.A, 1e-3);
  Vec x = Vec::Ones(g.size());
  for (auto _ : state) {
    x = cn.step(x);
    benchmark::DoNotOptimize(x.data());
  }
  state.counters["dofs"] = static_cast<double>(g.size());
}
BENCHMARK(BM_CrankNicolsonStep)->Arg(20)->Arg(40)->Arg(80);

void BM_ResolventDense(benchmark::State& state) {
  const auto g = boundary(static_cast<int>(state.range(0)), 50);
  const ResolventEvaluator r(g, true, ResolventEvaluator::Method::Dense);
  for (auto _ : state) benchmark::DoNotOptimize(r(50.0));
}
BENCHMARK(BM_ResolventDense)->Arg(100)->Arg(250)->Unit(benchmark::kMillisecond);

void BM_ResolventSparse(benchmark::State& state) {
  const auto g = boundary(static_cast<int>(state.range(0)), 200);
  const ResolventEvaluator r(g, true, ResolventEvaluator::Method::Sparse);
  for (auto _ : state) benchmark::DoNotOptimize(r(50.0));
}
BENCHMARK(BM_ResolventSparse)->Arg(400)->Arg(1600)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
