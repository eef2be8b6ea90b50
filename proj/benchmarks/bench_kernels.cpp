#include <benchmark/benchmark.h>
static void bm_noop(benchmark::State& state) { for (auto _ : state) {} }
BENCHMARK(bm_noop);
BENCHMARK_MAIN();
