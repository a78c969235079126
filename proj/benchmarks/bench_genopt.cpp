#include <benchmark/benchmark.h>

#include "copkit/datagen.hpp"
#include "copkit/genopt.hpp"

using namespace copkit;

namespace {

double quadratic(const std::array<double, 6>& genes) {
    static constexpr std::array<double, 6> optimum{-10.0, -8.0, 4.0, 10.0, 5.0, 9.0};
    double s = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        const double d = genes[i] - optimum[i];
        s -= d * d;
    }
    return s;
}

void BM_RunGa(benchmark::State& state) {
    GaConfig config;
    config.max_generations = static_cast<int>(state.range(0));
    config.stagnation_patience = config.max_generations;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        config.seed = seed++;
        benchmark::DoNotOptimize(run_ga(quadratic, config));
    }
}
BENCHMARK(BM_RunGa)->Arg(20)->Arg(100);

void BM_BruteForceLattice(benchmark::State& state) {
    ParameterGrid grid;
    grid.cio_step = 5.0;
    grid.hom_step = 5.0;
    for (auto _ : state) benchmark::DoNotOptimize(brute_force(quadratic, grid));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.cardinality()));
}
BENCHMARK(BM_BruteForceLattice);

void BM_SbxCrossover(benchmark::State& state) {
    std::mt19937_64 rng(1);
    Chromosome a, b;
    a.genes = {-3.0, 2.0, 7.0, 1.0, 9.0, 4.0};
    b.genes = {5.0, -8.0, 0.0, 6.0, 2.0, 10.0};
    GeneBounds bounds;
    for (auto _ : state) benchmark::DoNotOptimize(sbx_crossover(a, b, 15.0, bounds, rng));
}
BENCHMARK(BM_SbxCrossover);

}  // namespace
