// Serial reference loops against their OpenMP counterparts, plus the FFT and
// a full stepper step for scale. Run with OMP_NUM_THREADS set to compare.

#include <benchmark/benchmark.h>

#include <random>

#include "ksmix/dynamics.hpp"
#include "ksmix/kernels.hpp"
#include "ksmix/torus.hpp"

namespace {

using namespace ksmix;

AlignedVector<double> random_real(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AlignedVector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

AlignedVector<Complex> random_complex(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AlignedVector<Complex> v(n);
  for (auto& x : v) x = {u(rng), u(rng)};
  return v;
}

std::size_t cube(const benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  return n * n * n;
}

template <bool Parallel>
void BM_Flux(benchmark::State& state) {
  const std::size_t n = cube(state);
  auto rho = random_real(n, 1), drift = random_real(n, 2), vel = random_real(n, 3);
  AlignedVector<double> out(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::flux(out, rho, drift, vel, 8.0);
    } else {
      kernels::serial::flux(out, rho, drift, vel, 8.0);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_Rk4Finish(benchmark::State& state) {
  const std::size_t n = cube(state);
  auto full = random_real(n, 1), half = random_real(n, 2);
  auto rho = random_complex(n, 3), k1 = random_complex(n, 4), k2 = random_complex(n, 5),
       k3 = random_complex(n, 6), k4 = random_complex(n, 7);
  AlignedVector<Complex> out(n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::rk4_finish(out, full, half, rho, 1e-3, k1, k2, k3, k4);
    } else {
      kernels::serial::rk4_finish(out, full, half, rho, 1e-3, k1, k2, k3, k4);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_WeightedEnergy(benchmark::State& state) {
  const std::size_t n = cube(state);
  auto c = random_complex(n, 1);
  auto w = random_real(n, 2);
  for (auto _ : state) {
    double e = Parallel ? kernels::weighted_energy(c, w) : kernels::serial::weighted_energy(c, w);
    benchmark::DoNotOptimize(e);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_MaxNorm(benchmark::State& state) {
  const std::size_t n = cube(state);
  auto a = random_real(n, 1), b = random_real(n, 2), c = random_real(n, 3);
  const std::span<const double> parts[] = {a, b, c};
  for (auto _ : state) {
    double m = Parallel ? kernels::max_norm(parts) : kernels::serial::max_norm(parts);
    benchmark::DoNotOptimize(m);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_ForwardFFT(benchmark::State& state) {
  const TorusGrid grid(3, static_cast<int>(state.range(0)));
  auto in = random_real(grid.size(), 1);
  AlignedVector<Complex> out(grid.spectral_size());
  for (auto _ : state) {
    forward_transform(grid, in, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_Step(benchmark::State& state) {
  const TorusGrid grid(3, static_cast<int>(state.range(0)));
  FlowSpec flow;
  flow.kind = FlowKind::AlternatingShear;
  flow.amplitude = 8.0;
  Physics physics;
  Integrator integrator(grid, physics, make_flow(flow, grid));
  const ScalarField rho0 = ScalarField::sample(grid, [](const std::array<double, 3>& x) {
    return 1.0 + 0.5 * std::cos(x[0]) * std::cos(x[1]) * std::cos(x[2]);
  });
  StepperState s(forward_transform(rho0));
  s.dt = 1e-3;
  for (auto _ : state) integrator.step(s);
}

}  // namespace

BENCHMARK(BM_Flux<false>)->Arg(32)->Arg(64);
BENCHMARK(BM_Flux<true>)->Arg(32)->Arg(64);
BENCHMARK(BM_Rk4Finish<false>)->Arg(32)->Arg(64);
BENCHMARK(BM_Rk4Finish<true>)->Arg(32)->Arg(64);
BENCHMARK(BM_WeightedEnergy<false>)->Arg(32)->Arg(64);
BENCHMARK(BM_WeightedEnergy<true>)->Arg(32)->Arg(64);
BENCHMARK(BM_MaxNorm<false>)->Arg(32)->Arg(64);
BENCHMARK(BM_MaxNorm<true>)->Arg(32)->Arg(64);
BENCHMARK(BM_ForwardFFT)->Arg(32)->Arg(48)->Arg(64);
BENCHMARK(BM_Step)->Arg(32)->Arg(48);

BENCHMARK_MAIN();
