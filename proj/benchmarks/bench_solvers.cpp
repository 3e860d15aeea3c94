#include <benchmark/benchmark.h>

#include "csuv/simgen.hpp"
#include "csuv/solvers.hpp"

namespace {

using namespace csuv;

const GeneratedDataset& dataset(Index p) {
    static const GeneratedDataset d100 = generate(ModelSpec::model2(100, 5, 0.5, 3));
    static const GeneratedDataset d1000 = generate(ModelSpec::model2(1000, 5, 0.5, 3));
    return p == 100 ? d100 : d1000;
}

PenaltySpec penalty_of(int k) {
    switch (k) {
        case 0: return PenaltySpec::lasso();
        case 1: return PenaltySpec::mcp();
        default: return PenaltySpec::scad();
    }
}

// Full 100-point path with warm starts; arg 0 picks the penalty, arg 1 is p.
void BM_FitPath(benchmark::State& state) {
    const auto& d = dataset(static_cast<Index>(state.range(1)));
    const PenaltySpec penalty = penalty_of(static_cast<int>(state.range(0)));
    const LambdaPath path = make_lambda_path(d.design, penalty);
    FitOptions options;
    options.truncate_on_failure = true;
    for (auto _ : state) benchmark::DoNotOptimize(fit_path(d.design, penalty, path, options));
    state.SetLabel(penalty.name());
}
BENCHMARK(BM_FitPath)->ArgsProduct({{0, 1, 2}, {100, 1000}})->Unit(benchmark::kMillisecond);

void BM_KfoldCv(benchmark::State& state) {
    const auto& d = dataset(100);
    const PenaltySpec penalty = PenaltySpec::lasso();
    const LambdaPath path = make_lambda_path(d.design, penalty);
    for (auto _ : state) benchmark::DoNotOptimize(kfold_cv_tune(d.design, penalty, path, 10, 7));
}
BENCHMARK(BM_KfoldCv)->Unit(benchmark::kMillisecond);

}  // namespace
