#include "fixtures.hpp"

#include "discafem/cases.hpp"
#include "discafem/fem.hpp"
#include "discafem/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace discafem;

namespace {

constexpr double pi = std::numbers::pi;

// Point at distance rho from the origin, angle delta measured from the positive y axis.
Point lshaped_point(double rho, double delta)
{
    return {rho * std::cos(delta + pi / 2), rho * std::sin(delta + pi / 2)};
}

// max_i |a(u, phi_i) - (f, phi_i)| over interior hat functions, with the exact u.
// Adaptive quadrature resolves the interfaces and singular points.
double weak_residual(const TestCase& tc, int levels)
{
    auto f = MeshForest::load_initial(tc.initial_mesh);
    for (int i = 0; i < levels; ++i)
        f.refine_uniform();
    P1Space V(f);
    std::vector<double> res(V.num_dofs(), 0.0);
    AdaptiveOptions opt;
    opt.tol = 1e-10;
    for (std::size_t e = 0; e < V.num_elements(); ++e) {
        const Triangle t = f.triangle(V.elements()[e]);
        const auto grads = t.barycentric_gradients();
        const Point c = t.centroid();
        const auto r = integrate_adaptive_array<3>(
            [&](Point x) {
                const Point flux = tc.oracle.A(x).apply(tc.exact_gradient(x));
                const double fx = tc.oracle.f(x);
                std::array<double, 3> v;
                for (int i = 0; i < 3; ++i)
                    v[i] = dot(flux, grads[i]) - fx * (1.0 / 3.0 + dot(grads[i], x - c));
                return v;
            },
            t, opt);
        const auto& d = V.element_dofs(e);
        for (int i = 0; i < 3; ++i)
            res[d[i]] += r.value[i];
    }
    double m = 0.0;
    for (std::uint32_t d : V.interior_dofs())
        m = std::max(m, std::abs(res[d]));
    return m;
}

} // namespace

TEST_CASE("L-shaped exact solution")
{
    const auto tc = lshaped_case();
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.01, 1.5 * pi - 0.01);
    const double h = 1e-7;
    for (int i = 0; i < 20; ++i) {
        const double d = u(rng);
        const Point in = lshaped_point(kLshapedRho0 - 1e-12, d);
        const Point out = lshaped_point(kLshapedRho0 + 1e-12, d);
        CHECK(tc.exact(in) == doctest::Approx(tc.exact(out)).epsilon(1e-10));

        // One-sided radial derivatives by finite differences, independent of exact_gradient.
        const double din = (tc.exact(lshaped_point(kLshapedRho0, d)) - tc.exact(lshaped_point(kLshapedRho0 - h, d))) / h;
        const double dout = (tc.exact(lshaped_point(kLshapedRho0 + h, d)) - tc.exact(lshaped_point(kLshapedRho0, d))) / h;
        CHECK(1.0 * din == doctest::Approx(kLshapedOuter * dout).epsilon(1e-5));

        // exact_gradient agrees with central differences away from the interface.
        const Point x = lshaped_point(1.0 + 2.0 * double(i) / 20.0 + (i % 2) * 2.5, d);
        const Point g = tc.exact_gradient(x);
        const double gx = (tc.exact({x.x + h, x.y}) - tc.exact({x.x - h, x.y})) / (2 * h);
        const double gy = (tc.exact({x.x, x.y + h}) - tc.exact({x.x, x.y - h})) / (2 * h);
        CHECK(g.x == doctest::Approx(gx).epsilon(1e-6));
        CHECK(g.y == doctest::Approx(gy).epsilon(1e-6));
    }
    for (double y : {0.5, 2.0, 4.9})
        CHECK(tc.exact({0.0, y}) == doctest::Approx(0.0).scale(1.0));
    CHECK(tc.oracle.A({1, -1}).xx == 1.0);
    CHECK(tc.oracle.A({4, -4}).xx == 5.0);
}

TEST_CASE("L-shaped load is minus the divergence of the flux")
{
    const auto tc = lshaped_case();
    const double h = 1e-5;
    for (Point x : {Point{-3.5, 1.0}, Point{-1.0, -4.0}, Point{3.0, -2.5}, Point{-4.0, 4.0}}) {
        auto flux = [&](Point p) { return tc.oracle.A(p).apply(tc.exact_gradient(p)); };
        const double div = (flux({x.x + h, x.y}).x - flux({x.x - h, x.y}).x) / (2 * h) +
                           (flux({x.x, x.y + h}).y - flux({x.x, x.y - h}).y) / (2 * h);
        CHECK(tc.oracle.f(x) == doctest::Approx(-div).epsilon(1e-5));
    }
    CHECK(tc.oracle.f({0.5, -0.5}) == 0.0);
}

TEST_CASE("Kellogg parameters")
{
    const KelloggParams p;
    for (double r : kellogg_residuals(p))
        CHECK(std::abs(r) < 1e-8);
    CHECK(kellogg_constraints_hold(p));

    for (double d : {pi / 2, pi, 1.5 * pi}) {
        CHECK(kellogg_mu(p, d - 1e-13) == doctest::Approx(kellogg_mu(p, d)).epsilon(1e-10));
    }
    CHECK(kellogg_mu(p, 2 * pi - 1e-13) == doctest::Approx(kellogg_mu(p, 0.0)).epsilon(1e-10));

    // Flux continuity across the four interface rays: a * mu' matches.
    const double a[4] = {p.b, 1.0, p.b, 1.0};
    const double rays[4] = {pi / 2, pi, 1.5 * pi, 2 * pi};
    for (int i = 0; i < 4; ++i) {
        const double left = a[i] * kellogg_mu_prime(p, rays[i] - 1e-13);
        const double right = a[(i + 1) % 4] * kellogg_mu_prime(p, std::fmod(rays[i], 2 * pi) + 1e-13);
        CHECK(left == doctest::Approx(right).epsilon(1e-8));
    }

    const auto tc = kellogg_case();
    for (double x : {0.9, 0.5, -0.7})
        CHECK(tc.oracle.f({x, 0.3}) == 0.0);
}

TEST_CASE("smooth case")
{
    const auto tc = smooth_case();
    for (Point x : {Point{0.3, 0.4}, Point{0.7, 0.2}})
        CHECK(tc.oracle.f(x) / tc.exact(x) == doctest::Approx(2 * pi * pi));
    CHECK_THROWS_AS(make_case("square"), std::out_of_range);
    CHECK(make_case("kellogg").name == "kellogg");
}

TEST_CASE("exact solutions satisfy the weak form")
{
    CHECK(weak_residual(smooth_case(), 4) < 1e-9);
    for (const auto& tc : {lshaped_case(), kellogg_case()}) {
        CAPTURE(tc.name);
        CHECK(weak_residual(tc, 4) < 1e-3);
    }
}
