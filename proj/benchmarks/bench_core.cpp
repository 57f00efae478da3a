#include <benchmark/benchmark.h>

#include <vector>

#include "mems/green.hpp"
#include "mems/solver.hpp"
#include "mems/stability.hpp"

using namespace mems;

static void BM_ApplyGreen(benchmark::State& state) {
    const auto grid = make_grid(static_cast<std::size_t>(state.range(0)), 3.0);
    const GreenOperator green(grid, 2, 4.0 / 3.0);
    std::vector<double> f(grid->n_nodes(), 1.0), out(grid->n_nodes());
    for (auto _ : state) {
        green.apply_into(f, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ApplyGreen)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

static void BM_GreenSetup(benchmark::State& state) {
    const auto grid = make_grid(static_cast<std::size_t>(state.range(0)), 3.0);
    for (auto _ : state) {
        GreenOperator green(grid, 2, 4.0 / 3.0);
        benchmark::DoNotOptimize(&green);
    }
}
BENCHMARK(BM_GreenSetup)->Arg(2048);

static void BM_IterateMinimal(benchmark::State& state) {
    const auto grid = make_grid(static_cast<std::size_t>(state.range(0)), 3.0);
    ProblemParams p;
    p.lambda = 0.1;
    for (auto _ : state) {
        auto out = iterate_minimal(p, grid);
        benchmark::DoNotOptimize(out.final_gap);
    }
}
BENCHMARK(BM_IterateMinimal)->Arg(1024)->Arg(2048)->Arg(4096)->Unit(benchmark::kMillisecond);

static void BM_SmallestEigenpair(benchmark::State& state) {
    const auto grid = make_grid(static_cast<std::size_t>(state.range(0)), 3.0);
    ProblemParams p;
    p.lambda = 0.1;
    const auto out = iterate_minimal(p, grid);
    const auto op = assemble_linearized(*out.solution, p);
    for (auto _ : state) {
        auto eig = smallest_eigenpair(op);
        benchmark::DoNotOptimize(eig.mu1);
    }
}
BENCHMARK(BM_SmallestEigenpair)->Arg(1024)->Arg(2048)->Arg(4096)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
