#include <benchmark/benchmark.h>

#include <random>

#include "copkit/surrogate.hpp"

using namespace copkit;

namespace {

std::vector<FeatureRow> synthetic_rows(std::size_t n) {
    std::mt19937_64 rng(7);
    auto u01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<FeatureRow> rows(n);
    for (FeatureRow& row : rows) {
        for (std::size_t i = 0; i < 3; ++i) row.x[i] = -10.0 + 20.0 * u01();
        for (std::size_t i = 3; i < 6; ++i) row.x[i] = 10.0 * u01();
        row.y = std::sin(row.x[0]) + 0.2 * row.x[1] * row.x[3] - 0.5 * row.x[5];
    }
    return rows;
}

void BM_FitGbrt(benchmark::State& state) {
    const auto rows = synthetic_rows(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_gbrt(rows, 100, 3, 0.1, 5.0, 0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitGbrt)->Arg(512)->Arg(3375);

void BM_PredictGbrt(benchmark::State& state) {
    const auto rows = synthetic_rows(2048);
    const GbrtModel model = fit_gbrt(rows, 100, 3, 0.1, 5.0, 0);
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(predict(model, rows[i++ % rows.size()].x));
}
BENCHMARK(BM_PredictGbrt);

void BM_PredictKnn(benchmark::State& state) {
    const auto rows = synthetic_rows(static_cast<std::size_t>(state.range(0)));
    const KnnModel model = fit_knn(rows, 5);
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(predict(model, rows[i++ % rows.size()].x));
}
BENCHMARK(BM_PredictKnn)->Arg(2048)->Arg(16384);

void BM_FitLinear(benchmark::State& state) {
    const auto rows = synthetic_rows(4096);
    for (auto _ : state) benchmark::DoNotOptimize(fit_linear(rows));
}
BENCHMARK(BM_FitLinear);

}  // namespace
