#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "sphmean/calculus.hpp"
#include "sphmean/forward.hpp"
#include "sphmean/inversion.hpp"
#include "sphmean/phantom.hpp"
#include "sphmean/spectral.hpp"

using namespace sphmean;

namespace {

Phantom reference() {
  Phantom p;
  p.half_order = 2;
  p.width = 4.0;
  return p;
}

GridField bump(std::size_t n) {
  const double h = 8.0 / static_cast<double>(n);
  const Axis a{"x'", -4.0, h, n, Parity::None};
  const Axis b{"pn", -4.0, h, n, Parity::None};
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) v[i * n + k] = std::exp(-a.at(i) * a.at(i) - b.at(k) * b.at(k));
  return GridField({a, b}, v);
}

void BM_apply_D(benchmark::State& state) {
  calculus::EvenProfile h{1.0 / 64.0, std::vector<double>(static_cast<std::size_t>(state.range(0)))};
  for (std::size_t j = 0; j < h.size(); ++j) h.samples[j] = std::exp(-h.t(j) * h.t(j));
  for (auto _ : state) benchmark::DoNotOptimize(calculus::apply_D(h));
}
BENCHMARK(BM_apply_D)->Arg(512)->Arg(4096);

void BM_abel_forward(benchmark::State& state) {
  calculus::EvenProfile h{1.0 / 64.0, std::vector<double>(static_cast<std::size_t>(state.range(0)))};
  for (std::size_t j = 0; j < h.size(); ++j) h.samples[j] = std::exp(-h.t(j) * h.t(j));
  for (auto _ : state) benchmark::DoNotOptimize(calculus::abel_forward(h, 2));
}
BENCHMARK(BM_abel_forward)->Arg(128)->Arg(512);

void BM_apply_N(benchmark::State& state) {
  const GridField g = bump(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(spectral::apply_N(g, +1));
}
BENCHMARK(BM_apply_N)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_spherical_means(benchmark::State& state) {
  const Axis xp{"x'", -8.0, 1.0 / 16.0, 256, Parity::None};
  const Axis t{"t", 0.0, 8.0 / 511.0, 512, Parity::Even};
  for (auto _ : state) benchmark::DoNotOptimize(forward::spherical_means(reference(), xp, t));
}
BENCHMARK(BM_spherical_means)->Unit(benchmark::kMillisecond);

void BM_wave_trace_spectral(benchmark::State& state) {
  const Axis window{"x'", -8.0, 1.0 / 16.0, 256, Parity::None};
  const Axis t{"t", 0.0, 8.0 / 511.0, 512, Parity::Even};
  const GridField box = forward::periodic_box(reference(), t.back(), window);
  for (auto _ : state) benchmark::DoNotOptimize(forward::wave_trace_spectral(box, t, window));
}
BENCHMARK(BM_wave_trace_spectral)->Unit(benchmark::kMillisecond);

void BM_backproject_point(benchmark::State& state) {
  const Axis window{"x'", -8.0, 1.0 / 16.0, 256, Parity::None};
  const Axis t{"t", 0.0, 1.0 / 64.0, 513, Parity::Even};
  const GridField tr = forward::wave_trace_spectral(forward::periodic_box(reference(), t.back(), window), t, window);
  const GridField W = inversion::precompute_W(tr);
  for (auto _ : state) benchmark::DoNotOptimize(calculus::backproject_kernel_integral(W, 0.25, 0.5, {8.0, 8.0, 2.0}));
}
BENCHMARK(BM_backproject_point)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
