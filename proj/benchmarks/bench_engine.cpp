#include <benchmark/benchmark.h>

#include "csuv/engine.hpp"
#include "csuv/simgen.hpp"

namespace {

using namespace csuv;

// End-to-end ensemble run at p = state.range(0), single thread.
void BM_RunCsuv(benchmark::State& state) {
    const GeneratedDataset d = generate(ModelSpec::model2(state.range(0), 5, 0.5, 5));
    CsuvConfig config;
    config.repetitions = static_cast<int>(state.range(1));
    config.jobs = 1;
    for (auto _ : state) benchmark::DoNotOptimize(run_csuv(d.design, config));
}
BENCHMARK(BM_RunCsuv)->Args({100, 20})->Args({300, 20})->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace
BENCHMARK_MAIN();
