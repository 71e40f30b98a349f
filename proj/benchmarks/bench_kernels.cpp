#include <benchmark/benchmark.h>

#include "mgres/resilience.hpp"
#include "mgres/solver.hpp"

using namespace mgres;

namespace {

// Finest level L on n0=4 split 2x2x2; L=3 and 4 give 32^3 and 64^3 cells.
Cluster make_cluster(int levels) {
    const auto h = build_hierarchy(4, levels);
    return Cluster(h, build_partition(h, {2, 2, 2}));
}

void BM_SmoothSweep(benchmark::State& state) {
    Cluster c = make_cluster(static_cast<int>(state.range(0)));
    MultigridSolver solver(c, {});
    const int L = c.hierarchy().finest_level();
    for (auto _ : state) solver.smooth(L, 1);
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.hierarchy().level(L).box().interior().size()));
}
BENCHMARK(BM_SmoothSweep)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_GhostExchange(benchmark::State& state) {
    Cluster c = make_cluster(static_cast<int>(state.range(0)));
    const int L = c.hierarchy().finest_level();
    for (auto _ : state) c.ghost_exchange(L, FieldKind::Solution);
}
BENCHMARK(BM_GhostExchange)->Arg(3)->Arg(4)->Unit(benchmark::kMicrosecond);

// Every iteration cycles from the initial guess. Cycling a converged iterate over and
// over gave timings that did not follow the work model (F faster than V).
void BM_Cycle(benchmark::State& state) {
    const Cluster start = make_cluster(4);
    const auto type = static_cast<CycleType>(state.range(0));
    for (auto _ : state) {
        state.PauseTiming();
        Cluster c = start;
        MultigridSolver solver(c, {});
        state.ResumeTiming();
        solver.cycle(c.hierarchy().finest_level(), type);
    }
    state.SetLabel(std::string(to_string(type)) + "(3,3)");
}
BENCHMARK(BM_Cycle)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_LocalRecovery(benchmark::State& state) {
    Cluster c = make_cluster(4);
    MultigridSolver solver(c, {});
    for (int k = 0; k < 5; ++k) solver.cycle();
    c.erase_rank(0);
    c.assign_substitute(0);
    const LocalProblem problem = LocalProblem::from_cluster(c, 0);
    for (auto _ : state) benchmark::DoNotOptimize(local_mg_cycle(problem, CycleType::V, 3));
}
BENCHMARK(BM_LocalRecovery)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
