#include "fixtures.hpp"

#include "discafem/afem.hpp"
#include "discafem/cases.hpp"

#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

using namespace discafem;

namespace {

EstimatorReport report_of(const std::vector<double>& eta)
{
    EstimatorReport r;
    double s = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        r.elements.push_back(NodeId(i));
        r.eta.push_back(eta[i]);
        s += eta[i] * eta[i];
    }
    r.total = std::sqrt(s);
    return r;
}

PwPolyMatrix identity_on(const MeshForest& f)
{
    PwPolyMatrix A;
    A.partition = f.active_partition();
    A.poly.assign(A.partition.size(), AffineSym2::constant(SymMat2::identity()));
    A.r_hat = A.M_hat = 1.0;
    A.certified = true;
    return A;
}

PwPolyScalar scalar_on(const MeshForest& f, const std::function<double(Point)>& g)
{
    PwPolyScalar s;
    s.partition = f.active_partition();
    for (NodeId id : s.partition)
        s.poly.push_back(Affine::constant(g(f.triangle(id).centroid())));
    return s;
}

} // namespace

TEST_CASE("Dorfler marking examples")
{
    // Total 6, threshold 3: the first indicator (4) suffices.
    const auto one = dorfler_mark(report_of({2, 1, 1}), std::sqrt(0.5));
    CHECK(one == std::vector<NodeId>{0});

    const auto all = dorfler_mark(report_of({2, 1, 1, 0.5}), 0.999999);
    CHECK(all.size() == 4);

    CHECK(dorfler_mark(report_of({0, 0, 0}), 0.5).empty());

    // Ties resolve by element id.
    const auto tie = dorfler_mark(report_of({1, 1, 1, 1}), 0.5);
    CHECK(tie == std::vector<NodeId>{0});
}

TEST_CASE("Dorfler marking is minimal (exhaustive)")
{
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 12;
        std::vector<double> eta(n);
        for (double& e : eta)
            e = u(rng) < 0.2 ? 0.5 : u(rng);
        const double theta = 0.1 + 0.8 * u(rng);
        const auto rep = report_of(eta);
        const auto marked = dorfler_mark(rep, theta);
        const double target = theta * theta * rep.total * rep.total;

        double got = 0.0;
        for (NodeId id : marked)
            got += eta[id] * eta[id];
        CHECK(got >= target);

        // No subset with fewer elements reaches the target.
        std::size_t best = n + 1;
        for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (mask & (1u << i))
                    s += eta[i] * eta[i];
            if (s >= target)
                best = std::min<std::size_t>(best, std::popcount(mask));
        }
        CHECK(marked.size() == best);
    }
}

TEST_CASE("trivial problem needs no iterations")
{
    auto f = MeshForest::load_initial(fixtures::unit_square());
    const auto r = pde(f, identity_on(f), scalar_on(f, [](Point) { return 0.0; }), {}, 1e-3, PdeConfig{});
    CHECK(r.converged);
    CHECK(r.inner_iterations == 0);
    CHECK(r.report.total == 0.0);
    for (double x : r.U)
        CHECK(x == 0.0);
    CHECK(f.num_active() == 2);
}

TEST_CASE("smooth problem: estimator decreases and the loop terminates")
{
    const auto tc = smooth_case();
    auto f = MeshForest::load_initial(tc.initial_mesh);
    const auto fhat = scalar_on(f, tc.oracle.f);
    const auto A = identity_on(f);
    const Partition input = f.active_partition();
    std::vector<Point> input_points;
    {
        P1Space V(f);
        for (std::uint32_t d = 0; d < V.num_dofs(); ++d)
            input_points.push_back(V.dof_point(d));
    }

    std::vector<double> etas;
    PdeConfig cfg;
    cfg.on_iteration = [&](const PdeIteration& it) { etas.push_back(it.eta); };
    WarmStart warm;
    const auto r = pde(f, A, fhat, {}, 0.5, cfg, &warm);
    CHECK(r.converged);
    CHECK(r.report.total <= 0.5);
    CHECK(r.inner_iterations + 1 == etas.size());
    for (std::size_t i = 1; i < etas.size(); ++i)
        CHECK(etas[i] < etas[i - 1]);
    CHECK(f.is_conforming());
    CHECK(f.is_refinement(f.active_partition(), input));
    CHECK(r.galerkin_residual <= 1e-10);

    P1Space V(f);
    std::size_t found = 0;
    for (std::uint32_t d = 0; d < V.num_dofs(); ++d)
        found += std::count(input_points.begin(), input_points.end(), V.dof_point(d));
    CHECK(found == input_points.size());
}

TEST_CASE("iteration cap reports an unconverged result")
{
    const auto tc = smooth_case();
    auto f = MeshForest::load_initial(tc.initial_mesh);
    PdeConfig cfg;
    cfg.max_inner_iterations = 2;
    const auto r = pde(f, identity_on(f), scalar_on(f, tc.oracle.f), {}, 1e-4, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.inner_iterations == 2);
    CHECK(r.U.size() == P1Space(f).num_dofs());

    PdeConfig bad;
    bad.theta = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("warm start prolongs previous values")
{
    auto f = MeshForest::load_initial(fixtures::unit_square());
    WarmStart ws;
    {
        P1Space V(f);
        ws.store(V, V.interpolate([](Point x) { return 2.0 * x.x + x.y; }));
    }
    f.refine_uniform();
    f.refine_uniform();
    P1Space W(f);
    const auto g = ws.guess(W);
    for (std::uint32_t d = 0; d < W.num_dofs(); ++d) {
        const Point p = W.dof_point(d);
        CHECK(g[d] == doctest::Approx(2.0 * p.x + p.y));
    }
}
