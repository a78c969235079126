#include <benchmark/benchmark.h>

#include "copkit/scenario.hpp"

using namespace copkit;

namespace {

const NetworkScenario& canonical() {
    static const NetworkScenario scenario = generate_scenario(42);
    return scenario;
}

void BM_Associate(benchmark::State& state) {
    const NetworkScenario& s = canonical();
    MobilityConfig config;
    config.cio_db = {4.0, -2.0, 0.0};
    std::size_t i = 0;
    for (auto _ : state) {
        const UserEquipment& ue = s.users[i++ % s.users.size()];
        benchmark::DoNotOptimize(associate(s, config, ue));
    }
}
BENCHMARK(BM_Associate);

void BM_EvaluateKpi(benchmark::State& state) {
    const NetworkScenario& s = canonical();
    MobilityConfig config;
    config.cio_db = {4.0, -2.0, 0.0};
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_kpi(s, config));
}
BENCHMARK(BM_EvaluateKpi);

void BM_GenerateScenario(benchmark::State& state) {
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(generate_scenario(seed++));
}
BENCHMARK(BM_GenerateScenario);

}  // namespace

BENCHMARK_MAIN();
