#include <benchmark/benchmark.h>

#include <random>

#include "incompat/linalg.hpp"

namespace {

using namespace incompat;

HermitianOperator random_hermitian(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix m(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) m(i, j) = Complex(normal(rng), normal(rng));
    }
    return HermitianOperator(0.5 * (m + m.adjoint()).eval());
}

void bm_hermitian_eig(benchmark::State& state) {
    std::mt19937_64 rng(7);
    const HermitianOperator a = random_hermitian(rng, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(hermitian_eig(a));
    }
}
BENCHMARK(bm_hermitian_eig)->Arg(3)->Arg(9)->Arg(27)->Arg(81);

void bm_frobenius_inner(benchmark::State& state) {
    std::mt19937_64 rng(11);
    const HermitianOperator a = random_hermitian(rng, static_cast<int>(state.range(0)));
    const HermitianOperator b = random_hermitian(rng, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(frobenius_inner(a, b));
    }
}
BENCHMARK(bm_frobenius_inner)->Arg(9)->Arg(81);

} // namespace
