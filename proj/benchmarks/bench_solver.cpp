#include <benchmark/benchmark.h>

#include "incompat/witness.hpp"

namespace {

using namespace incompat;

void bm_pairwise_qubit(benchmark::State& state) {
    const Assembly paulis = pauli_assembly();
    for (auto _ : state) {
        benchmark::DoNotOptimize(pairwise_robustness(paulis, 1, 3));
    }
}
BENCHMARK(bm_pairwise_qubit)->Unit(benchmark::kMillisecond);

void bm_genuine_pauli(benchmark::State& state) {
    const Assembly paulis = pauli_assembly();
    for (auto _ : state) {
        benchmark::DoNotOptimize(genuine_robustness(paulis, {1, 2, 3}));
    }
}
BENCHMARK(bm_genuine_pauli)->Unit(benchmark::kMillisecond);

void bm_genuine_mub3(benchmark::State& state) {
    const Assembly mub = mub_assembly(3, static_cast<int>(state.range(0)));
    std::vector<int> group;
    for (int x = 1; x <= static_cast<int>(state.range(0)); ++x) group.push_back(x);
    for (auto _ : state) {
        benchmark::DoNotOptimize(genuine_robustness(mub, group));
    }
}
BENCHMARK(bm_genuine_mub3)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void bm_full_compat_pauli(benchmark::State& state) {
    const Assembly paulis = pauli_assembly();
    for (auto _ : state) {
        benchmark::DoNotOptimize(full_compat_robustness(paulis, {1, 2, 3}));
    }
}
BENCHMARK(bm_full_compat_pauli)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
