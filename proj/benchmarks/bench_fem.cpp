#include "discafem/cases.hpp"
#include "discafem/afem.hpp"

#include <benchmark/benchmark.h>

using namespace discafem;

static void BM_GalerkinSolve(benchmark::State& state)
{
    const auto tc = smooth_case();
    auto f = MeshForest::load_initial(tc.initial_mesh);
    for (int i = 0; i < state.range(0); ++i)
        f.refine_uniform();
    const P1Space V(f);
    PwPolyMatrix A;
    PwPolyScalar load;
    A.partition = load.partition = V.elements();
    A.poly.assign(V.num_elements(), AffineSym2::constant(SymMat2::identity()));
    A.r_hat = A.M_hat = 1.0;
    A.certified = true;
    for (NodeId id : V.elements())
        {
        const Point c = f.triangle(id).centroid();
        load.poly.push_back(Affine::constant(1.0 + c.x * c.y));
    }
    std::size_t iterations = 0;
    for (auto _ : state) {
        const auto sol = solve_galerkin(V, A, load, {}, 1e-10);
        iterations = sol.cg_iterations;
        benchmark::DoNotOptimize(sol.U.data());
    }
    state.counters["dofs"] = double(V.num_dofs());
    state.counters["cg_iterations"] = double(iterations);
}
BENCHMARK(BM_GalerkinSolve)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);
