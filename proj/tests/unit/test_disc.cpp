#include "fixtures.hpp"

#include "discafem/cases.hpp"
#include "discafem/disc.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace discafem;

namespace {

DiscProblem laplace_problem(std::function<double(Point)> f)
{
    DiscProblem p;
    p.oracle.A = [](Point) { return SymMat2::identity(); };
    p.oracle.f = std::move(f);
    p.oracle.r = p.oracle.M = 1.0;
    return p;
}

DiscProblem from_case(const TestCase& tc)
{
    DiscProblem p;
    p.oracle = tc.oracle;
    p.dirichlet = tc.exact;
    p.exact_gradient = tc.exact_gradient;
    return p;
}

PwPolyMatrix identity_on(const MeshForest& f, double s = 1.0)
{
    PwPolyMatrix A;
    A.partition = f.active_partition();
    A.poly.assign(A.partition.size(), AffineSym2::constant(SymMat2::identity(s)));
    A.r_hat = A.M_hat = s;
    A.certified = true;
    return A;
}

} // namespace

TEST_CASE("trivial data leaves the mesh alone")
{
    auto f = MeshForest::load_initial(fixtures::unit_square());
    auto p = laplace_problem([](Point) { return 0.0; });
    p.exact_gradient = [](Point) { return Point{}; };
    DiscConfig cfg;
    cfg.max_outer_iterations = 3;
    const auto t = disc(f, p, cfg);
    REQUIRE(t.rows.size() == 3);
    CHECK_FALSE(t.failure);
    for (const auto& r : t.rows) {
        CHECK(r.eta == 0.0);
        CHECK(r.energy_error == 0.0);
        CHECK(r.n_f + r.n_A + r.n_u == 0);
        CHECK(r.dofs_pde == 4);
    }
}

TEST_CASE("tolerance bookkeeping, nesting and determinism on the smooth case")
{
    const auto tc = smooth_case();
    DiscConfig cfg;
    cfg.max_dofs = 3000;
    cfg.record_time = false;

    auto f = MeshForest::load_initial(tc.initial_mesh);
    std::vector<Partition> parts;
    const auto t = disc(f, from_case(tc), cfg, [&](const DiscRow&) { parts.push_back(f.active_partition()); });
    REQUIRE(t.rows.size() >= 3);
    CHECK_FALSE(t.failure);
    std::size_t prev = 0;
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const auto& r = t.rows[k];
        CHECK(r.eta <= 0.5 * r.eps);
        CHECK(r.osc <= cfg.omega * r.eps);
        CHECK(r.coeff_error <= cfg.omega * r.eps);
        CHECK(r.dofs_rhs >= prev);
        CHECK(r.dofs_coeff >= r.dofs_rhs);
        CHECK(r.dofs_pde >= r.dofs_coeff);
        CHECK(r.galerkin_residual <= 10.0 * cfg.pde.cg_rel_tol);
        CHECK(r.seconds == 0.0);
        prev = r.dofs_pde;
        if (k > 0)
            CHECK(f.is_refinement(parts[k], parts[k - 1]));
    }
    CHECK(t.rows.back().dofs_pde >= cfg.max_dofs);

    std::ostringstream a, b;
    write_trace_csv(a, t);
    auto g = MeshForest::load_initial(tc.initial_mesh);
    write_trace_csv(b, disc(g, from_case(tc), cfg));
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("k,eps_k,dofs_rhs,dofs_coeff,dofs_pde,Nf,NA,Nu,eta,energy_error,seconds\n", 0) == 0);
}

TEST_CASE("failures are recorded with the iteration and stage")
{
    SUBCASE("coefficient below the sup-norm floor")
    {
        const auto tc = lshaped_case();
        auto f = MeshForest::load_initial(tc.initial_mesh);
        DiscConfig cfg;
        cfg.q = kInfinity;
        cfg.max_elements = 5000;
        const auto t = disc(f, from_case(tc), cfg);
        REQUIRE(t.failure);
        CHECK(t.failure->stage == "coeff");
        CHECK(t.failure->k == 0);
        CHECK(t.failure->reached >= 2.0);
        CHECK(t.failure->target == doctest::Approx(cfg.omega * cfg.eps0));
        CHECK(t.rows.empty());
    }
    SUBCASE("inner iteration cap")
    {
        const auto tc = smooth_case();
        auto f = MeshForest::load_initial(tc.initial_mesh);
        DiscConfig cfg;
        cfg.pde.max_inner_iterations = 1;
        cfg.eps0 = 0.2;
        const auto t = disc(f, from_case(tc), cfg);
        REQUIRE(t.failure);
        CHECK(t.failure->stage == "pde");
    }
    SUBCASE("invalid parameters")
    {
        DiscConfig cfg;
        cfg.beta = 1.0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg = {};
        cfg.q = 1.0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
}

TEST_CASE("perturbation check")
{
    auto f = MeshForest::load_initial(fixtures::unit_square());
    f.refine_uniform();
    f.refine_uniform();
    CoefficientOracle o;
    o.A = [](Point) { return SymMat2::identity(); };
    o.f = [](Point x) { return 1.0 + x.x; };

    SUBCASE("exact coefficient")
    {
        const auto r = perturbation_check(f, o, identity_on(f), 2, kInfinity, {});
        CHECK(r.lhs == doctest::Approx(0.0).scale(1.0));
        CHECK(r.rhs == 0.0);
    }
    SUBCASE("scaled coefficient gives equality")
    {
        // Ahat = A / (1 + delta/s): uhat = (1 + delta/s) u, so lhs = (delta/s) ||grad u||.
        const double factor = 1.0 + 0.3;
        const auto r = perturbation_check(f, o, identity_on(f, 1.0 / factor), 2, kInfinity, {}, 1e-13);

        auto fine = f;
        for (int i = 0; i < 2; ++i)
            fine.refine_uniform();
        P1Space V(fine);
        PwPolyScalar fm;
        fm.partition = V.elements();
        for (NodeId id : fm.partition) {
            const Point c = fine.triangle(id).centroid();
            fm.poly.push_back(Affine::constant(o.f(c)));
        }
        const auto u = solve_galerkin(V, identity_on(fine), fm, {}, 1e-13);
        double g2 = 0.0;
        for (std::size_t e = 0; e < V.num_elements(); ++e) {
            const Point g = V.gradient(e, u.U);
            g2 += fine.area(V.elements()[e]) * dot(g, g);
        }
        CHECK(r.lhs == doctest::Approx(0.3 * std::sqrt(g2)).epsilon(1e-9));
        CHECK(r.ratio <= 1.0);
    }
    SUBCASE("uncertified input")
    {
        auto A = identity_on(f);
        A.certified = false;
        CHECK_THROWS_AS(perturbation_check(f, o, A, 1, 4.0, {}), std::invalid_argument);
    }
}

TEST_CASE("scaling identity")
{
    auto f = MeshForest::load_initial(fixtures::unit_square());
    for (int i = 0; i < 4; ++i)
        f.refine_uniform();
    PwPolyScalar one;
    one.partition = f.active_partition();
    one.poly.assign(one.partition.size(), Affine::constant(1.0));
    const double tol = 1e-10;

    CHECK(scaling_identity_check(f, identity_on(f), one, 0.0, 1.0, tol).deviation == 0.0);
    const auto r = scaling_identity_check(f, identity_on(f), one, 1.0, 1.0, tol);
    CHECK(r.deviation <= 10.0 * tol * r.u1_norm);
    CHECK(r.u1_norm > 0.0);
}

TEST_CASE("L-shaped run: efficiency, error decay and estimator contraction")
{
    const auto tc = lshaped_case();
    auto f = MeshForest::load_initial(tc.initial_mesh);
    DiscConfig cfg;
    cfg.max_dofs = 20'000;
    cfg.record_time = false;
    double ratio_sum = 0.0;
    std::size_t ratio_count = 0;
    double prev_eta = 0.0;
    cfg.pde.on_iteration = [&](const PdeIteration& it) {
        if (it.iteration > 0 && prev_eta > 0.0) {
            ratio_sum += it.eta / prev_eta;
            ++ratio_count;
        }
        prev_eta = it.eta;
    };
    const auto t = disc(f, from_case(tc), cfg);
    REQUIRE_FALSE(t.failure);
    REQUIRE(t.rows.size() >= 3);

    double lo = 1e300, hi = 0.0;
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const double e = t.rows[k].energy_error / t.rows[k].eta;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        if (k > 0)
            CHECK(t.rows[k].energy_error < t.rows[k - 1].energy_error);
    }
    MESSAGE("error / estimator in [" << lo << ", " << hi << "]");
    CHECK(hi < 10.0 * lo);

    REQUIRE(ratio_count > 0);
    const double alpha = ratio_sum / double(ratio_count);
    MESSAGE("mean estimator ratio per inner iteration " << alpha << " over " << ratio_count << " steps");
    CHECK(alpha < 1.0);
}
