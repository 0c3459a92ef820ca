#include "discafem/cases.hpp"
#include "discafem/mesh.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace discafem;

static void BM_UniformRefinement(benchmark::State& state)
{
    const auto mesh = lshaped_case().initial_mesh;
    for (auto _ : state) {
        auto f = MeshForest::load_initial(mesh);
        for (int i = 0; i < state.range(0); ++i)
            f.refine_uniform();
        benchmark::DoNotOptimize(f.num_active());
    }
}
BENCHMARK(BM_UniformRefinement)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

// Random marking followed by conforming closure.
static void BM_RefineAndClose(benchmark::State& state)
{
    const auto mesh = lshaped_case().initial_mesh;
    std::size_t elements = 0;
    for (auto _ : state) {
        std::mt19937_64 rng(5);
        auto f = MeshForest::load_initial(mesh);
        for (int cycle = 0; cycle < state.range(0); ++cycle) {
            const auto active = f.active_partition();
            std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
            std::vector<NodeId> marked;
            for (std::size_t i = 0; i < active.size() / 10 + 1; ++i)
                marked.push_back(active[pick(rng)]);
            f.refine_marked(marked);
            f.conforming_closure();
        }
        elements = f.num_active();
    }
    state.counters["elements"] = double(elements);
}
BENCHMARK(BM_RefineAndClose)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
