#include <benchmark/benchmark.h>

#include "parkcast/tensor.hpp"

static void BM_Placeholder(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(parkcast::Tensor::identity(8));
    }
}
BENCHMARK(BM_Placeholder);

BENCHMARK_MAIN();
