#include <benchmark/benchmark.h>

#include <random>

#include "msnt/config.hpp"
#include "msnt/msalgebra.hpp"
#include "msnt/stepper.hpp"

using namespace msnt;

namespace {

MixtureParams mixture(int n) {
  Vector m(n);
  for (int i = 0; i < n; ++i) m(i) = 1.0 + i;
  MixtureParams p = MixtureParams::with_masses(m, 1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) p.b(i, j) = p.b(j, i) = u(rng);
  return p;
}

// Smooth nonuniform cells on N cells of the mixing preset.
struct Problem {
  RunConfig cfg;
  Scheme scheme;
  TrajectoryState state;

  explicit Problem(int cells)
      : cfg(resized(cells)),
        scheme(cfg.mixture, cfg.grid, cfg.stepper),
        state(make_trajectory(cfg.mixture, sample_profiles(cfg, cfg.grid))) {}

  static RunConfig resized(int cells) {
    RunConfig c = scenario_config("two-species-mixing");
    c.grid = Grid(cells, c.grid.length);
    return c;
  }
};

}  // namespace

static void BM_BottDuffin(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const MixtureParams p = mixture(n);
  Vector rho(n);
  for (int i = 0; i < n; ++i) rho(i) = 0.5 + 0.1 * i;
  for (auto _ : state) benchmark::DoNotOptimize(bott_duffin(p, rho));
}
BENCHMARK(BM_BottDuffin)->DenseRange(3, 10);

static void BM_Residual(benchmark::State& state) {
  const Problem pb(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pb.scheme.residual(pb.state, pb.state.vars));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Residual)->RangeMultiplier(4)->Range(16, 1024);

static void BM_Jacobian(benchmark::State& state) {
  const Problem pb(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pb.scheme.jacobian(pb.state, pb.state.vars));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Jacobian)->RangeMultiplier(4)->Range(16, 1024);

static void BM_Step(benchmark::State& state) {
  const Problem pb(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pb.scheme.step(pb.state));
}
BENCHMARK(BM_Step)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
