#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "cmv/coefficients.hpp"
#include "cmv/conditional_law.hpp"
#include "cmv/measures.hpp"
#include "cmv/oracles.hpp"
#include "cmv/reference_sim.hpp"

namespace {

cmv::DiscreteMeasure random_measure(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> atom;
  std::uniform_real_distribution<double> weight(0.01, 1.0);
  std::vector<double> a(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = atom(rng);
    w[i] = weight(rng);
  }
  return cmv::normalize(a, w);
}

void BM_ExactW1(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_measure(n, 1), b = random_measure(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(cmv::exact_w1(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ExactW1)->RangeMultiplier(8)->Range(8, 1 << 15)->Complexity();

void BM_SimulateEnsemble(benchmark::State& state) {
  const cmv::TimeGrid g(1.0, 100);
  const auto cs = cmv::builtin("meanfield-tanh");
  const auto mu = cmv::constant_path(g, cmv::DiscreteMeasure::dirac(cs.x0));
  const auto y = cmv::draw_observation(g, cmv::IncrementLaw::gaussian, 7);
  cmv::SimConfig sim;
  sim.n_particles = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(cmv::simulate_ensemble(cs, mu, y, sim));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 100);
}
BENCHMARK(BM_SimulateEnsemble)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ApplyT(benchmark::State& state) {
  const cmv::TimeGrid g(0.25, 50);
  const auto cs = cmv::builtin("meanfield-tanh");
  const auto mu = cmv::constant_path(g, cmv::DiscreteMeasure::dirac(cs.x0));
  cmv::SimConfig sim;
  sim.n_particles = static_cast<std::size_t>(state.range(0));
  const cmv::TMapContext ctx{cs, cmv::draw_observation(g, cmv::IncrementLaw::gaussian, 7), sim};
  for (auto _ : state) benchmark::DoNotOptimize(cmv::apply_t(ctx, mu));
}
BENCHMARK(BM_ApplyT)->Arg(1000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_TreeApplyT(benchmark::State& state) {
  const cmv::TimeGrid g(0.25, static_cast<std::size_t>(state.range(0)));
  const auto cs = cmv::builtin("meanfield-tanh");
  const auto mu = cmv::constant_path(g, cmv::DiscreteMeasure::dirac(cs.x0));
  const cmv::TreeInstance inst{cs, cmv::draw_observation(g, cmv::IncrementLaw::gaussian, 7)};
  for (auto _ : state) benchmark::DoNotOptimize(cmv::tree_apply_t(inst, mu));
}
BENCHMARK(BM_TreeApplyT)->DenseRange(4, 10, 2)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
