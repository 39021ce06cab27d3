// Serial reference vs OpenMP kernels on a synthetic radial grid.

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "katlas/kernels.hpp"
#include "katlas/profile.hpp"

namespace {

using katlas::PowerNonlinearity;
using katlas::RadialProfile;

RadialProfile sech_grid(std::size_t n, int N) {
  RadialProfile p;
  p.N = N;
  const double h = 40.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = h * static_cast<double>(i);
    p.r.push_back(r);
    p.v.push_back(std::sqrt(2.0) / std::cosh(r));
    p.dv.push_back(-std::sqrt(2.0) * std::tanh(r) / std::cosh(r));
  }
  return p;
}

const PowerNonlinearity& cubic() {
  static const PowerNonlinearity nl(1.0, {{1.0, 4.0}});
  return nl;
}

template <bool Parallel>
void BM_Dirichlet(benchmark::State& state) {
  const RadialProfile p = sech_grid(static_cast<std::size_t>(state.range(0)), 3);
  const auto g = katlas::kernels::view_of(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? katlas::kernels::dirichlet_integral(g)
                                      : katlas::kernels::serial::dirichlet_integral(g));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Potential(benchmark::State& state) {
  const RadialProfile p = sech_grid(static_cast<std::size_t>(state.range(0)), 3);
  const auto g = katlas::kernels::view_of(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? katlas::kernels::potential_integral(g, cubic())
                                      : katlas::kernels::serial::potential_integral(g, cubic()));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Residual(benchmark::State& state) {
  const RadialProfile p = sech_grid(static_cast<std::size_t>(state.range(0)), 1);
  const auto g = katlas::kernels::view_of(p);
  for (auto _ : state) {
    auto n = Parallel ? katlas::kernels::residual_norms(g, 1.0, cubic())
                      : katlas::kernels::serial::residual_norms(g, 1.0, cubic());
    benchmark::DoNotOptimize(n);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Sweep(benchmark::State& state) {
  std::vector<double> bs;
  for (int i = 0; i < state.range(0); ++i) bs.push_back(1e-3 * (i + 1));
  for (auto _ : state) {
    auto rows = Parallel ? katlas::kernels::branch_sweep(bs, 50.0, 1.0, 5)
                         : katlas::kernels::serial::branch_sweep(bs, 50.0, 1.0, 5);
    benchmark::DoNotOptimize(rows);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Dirichlet<false>)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Dirichlet<true>)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Potential<false>)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Potential<true>)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Residual<false>)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Residual<true>)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Sweep<false>)->Arg(256)->Arg(4096);
BENCHMARK(BM_Sweep<true>)->Arg(256)->Arg(4096);

BENCHMARK_MAIN();
