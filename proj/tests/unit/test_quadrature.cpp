#include "fixtures.hpp"

#include "discafem/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace discafem;

namespace {

const Triangle ref{{Point{0, 0}, Point{1, 0}, Point{0, 1}}};

} // namespace

TEST_CASE("rules have positive weights summing to one and their stated exactness")
{
    for (const QuadratureRule* rule : {&centroid_rule(), &edge_midpoint_rule(), &six_point_rule(), &sixteen_point_rule()}) {
        CAPTURE(rule->degree);
        CHECK(std::accumulate(rule->weights.begin(), rule->weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
        for (double w : rule->weights)
            CHECK(w > 0.0);
        for (const auto& p : rule->points)
            CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-14));
        for (int a = 0; a <= rule->degree; ++a)
            for (int b = 0; a + b <= rule->degree; ++b) {
                const double v = integrate([&](Point x) { return std::pow(x.x, a) * std::pow(x.y, b); }, ref, *rule);
                CHECK(v == doctest::Approx(fixtures::monomial_integral(a, b)).epsilon(1e-13));
            }
    }
    CHECK(rule_of_degree(3).degree == 4);
    CHECK_THROWS_AS(rule_of_degree(9), std::invalid_argument);
}

TEST_CASE("fixed rule examples")
{
    const Triangle half{{Point{2, 1}, Point{3, 1}, Point{2, 2}}};
    CHECK(integrate([](Point) { return 1.0; }, half, centroid_rule()) == doctest::Approx(0.5));
    CHECK(integrate([](Point x) { return x.x; }, ref, centroid_rule()) == doctest::Approx(1.0 / 6.0));
    CHECK(integrate([](Point x) { return x.x * x.x * x.y; }, ref, six_point_rule()) == doctest::Approx(1.0 / 60.0));
}

TEST_CASE("adaptive integration of a half-plane indicator")
{
    // Exact area of {x > 0.25} inside the reference triangle by clipping: (0.75)^2 / 2.
    AdaptiveOptions opt;
    opt.tol = 1e-6;
    const auto r = integrate_adaptive([](Point x) { return x.x > 0.25 ? 1.0 : 0.0; }, ref, opt);
    CHECK(r.value == doctest::Approx(9.0 / 32.0).epsilon(1e-6));
    CHECK_FALSE(r.depth_exceeded);

    // A line off the dyadic grid converges more slowly; the flag reports it.
    opt.max_depth = 10;
    const auto s = integrate_adaptive([](Point x) { return x.x + x.y > 1.0 / 3.0 ? 1.0 : 0.0; }, ref, opt);
    CHECK(s.value == doctest::Approx(0.5 - 1.0 / 18.0).epsilon(1e-3));
}

TEST_CASE("adaptive integration of smooth and constant integrands")
{
    const Triangle t{{Point{0.2, 0.1}, Point{1.3, 0.4}, Point{0.5, 1.2}}};
    auto g = [](Point x) { return std::exp(x.x) * std::sin(3.0 * x.y); };
    AdaptiveOptions opt;
    opt.tol = 1e-10;
    const auto r = integrate_adaptive(g, t, opt);
    // Composite 16-point rule on three levels of red refinement as the reference.
    std::vector<Triangle> tris{t};
    for (int level = 0; level < 3; ++level) {
        std::vector<Triangle> next;
        for (const Triangle& s : tris)
            for (const Triangle& c : red_split(s))
                next.push_back(c);
        tris = std::move(next);
    }
    double ref_value = 0.0;
    for (const Triangle& s : tris)
        ref_value += integrate(g, s, sixteen_point_rule());
    CHECK(std::abs(r.value - ref_value) <= 1e-9);

    const auto c = integrate_adaptive([](Point) { return 2.5; }, t, opt);
    CHECK(c.value == doctest::Approx(2.5 * t.area()).epsilon(1e-14));
    CHECK(c.reached_depth <= 1);
    CHECK_FALSE(c.depth_exceeded);
}

TEST_CASE("red split tiles the parent")
{
    const Triangle t{{Point{0, 0}, Point{2, 0}, Point{1, 3}}};
    double s = 0.0;
    for (const Triangle& k : red_split(t)) {
        CHECK(k.signed_area() > 0.0);
        s += k.area();
    }
    CHECK(s == doctest::Approx(t.area()));
}
