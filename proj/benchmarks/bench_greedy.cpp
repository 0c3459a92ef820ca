#include "discafem/cases.hpp"
#include "discafem/data_approx.hpp"

#include <benchmark/benchmark.h>

using namespace discafem;

// Greedy approximation of the interface coefficient, q given as the argument.
static void BM_CoeffGreedy(benchmark::State& state)
{
    const auto tc = lshaped_case();
    const double q = double(state.range(0));
    std::size_t elements = 0;
    for (auto _ : state) {
        auto f = MeshForest::load_initial(tc.initial_mesh);
        MatrixFitter fit(tc.oracle.A, q, 0);
        GreedyOptions opt;
        opt.q = q;
        const auto r = coeff(f, fit, tc.oracle, 0.5, opt);
        elements = f.num_active();
        benchmark::DoNotOptimize(r.error);
    }
    state.counters["elements"] = double(elements);
}
BENCHMARK(BM_CoeffGreedy)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_OscillationGreedy(benchmark::State& state)
{
    const auto tc = lshaped_case();
    for (auto _ : state) {
        auto f = MeshForest::load_initial(tc.initial_mesh);
        OscillationFitter fit(tc.oracle.f);
        const auto r = rhs(f, fit, 0.05);
        benchmark::DoNotOptimize(r.osc);
    }
}
BENCHMARK(BM_OscillationGreedy)->Unit(benchmark::kMillisecond);
