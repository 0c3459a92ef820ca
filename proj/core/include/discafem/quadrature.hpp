#pragma once

#include "discafem/geometry.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace discafem {

/// Symmetric rule on a triangle. Weights sum to one and are scaled by the area at use.
struct QuadratureRule
{
    std::vector<std::array<double, 3>> points; // barycentric
    std::vector<double> weights;
    int degree = 0;

    std::size_t size() const { return weights.size(); }
};

/// Centroid rule, exact for degree 1.
const QuadratureRule& centroid_rule();
/// Edge-midpoint rule, exact for degree 2.
const QuadratureRule& edge_midpoint_rule();
/// 6-point rule, exact for degree 4.
const QuadratureRule& six_point_rule();
/// 16-point rule, exact for degree 8.
const QuadratureRule& sixteen_point_rule();

/// Cheapest built-in rule exact for the given degree (at most 8).
const QuadratureRule& rule_of_degree(int degree);

template <class F>
double integrate(F&& fn, const Triangle& t, const QuadratureRule& rule)
{
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        s += rule.weights[i] * fn(t.from_barycentric(rule.points[i]));
    return s * t.area();
}

/// Integrates an array-valued function componentwise with one set of evaluations.
template <std::size_t N, class F>
std::array<double, N> integrate_array(F&& fn, const Triangle& t, const QuadratureRule& rule)
{
    std::array<double, N> s{};
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const std::array<double, N> v = fn(t.from_barycentric(rule.points[i]));
        for (std::size_t k = 0; k < N; ++k)
            s[k] += rule.weights[i] * v[k];
    }
    const double a = t.area();
    for (double& x : s)
        x *= a;
    return s;
}

/// Splits a triangle into four congruent children; child 3 is the inner one.
inline std::array<Triangle, 4> red_split(const Triangle& t)
{
    const Point m01 = 0.5 * (t.p[0] + t.p[1]);
    const Point m12 = 0.5 * (t.p[1] + t.p[2]);
    const Point m20 = 0.5 * (t.p[2] + t.p[0]);
    return {Triangle{{t.p[0], m01, m20}}, Triangle{{m01, t.p[1], m12}}, Triangle{{m20, m12, t.p[2]}},
            Triangle{{m12, m20, m01}}};
}

struct AdaptiveOptions
{
    double tol = 1e-8;
    /// When positive, the tolerance is raised to rel_tol times the largest coarse component.
    double rel_tol = 0.0;
    int max_depth = 12;
    const QuadratureRule* rule = nullptr; // six_point_rule() when null
};

template <std::size_t N>
struct AdaptiveResult
{
    std::array<double, N> value{};
    int reached_depth = 0;
    /// Some cell hit max_depth without meeting the tolerance.
    bool depth_exceeded = false;
};

namespace detail {

template <std::size_t N, class F>
void adaptive_cell(F& fn, const Triangle& cell, const std::array<double, N>& coarse, int depth, double tol_per_area,
                   const AdaptiveOptions& opt, AdaptiveResult<N>& out)
{
    const QuadratureRule& rule = *opt.rule;
    const auto kids = red_split(cell);
    std::array<std::array<double, N>, 4> part;
    std::array<double, N> fine{};
    for (int c = 0; c < 4; ++c) {
        part[c] = integrate_array<N>(fn, kids[c], rule);
        for (std::size_t k = 0; k < N; ++k)
            fine[k] += part[c][k];
    }
    double diff = 0.0;
    for (std::size_t k = 0; k < N; ++k)
        diff = std::max(diff, std::abs(fine[k] - coarse[k]));
    out.reached_depth = std::max(out.reached_depth, depth + 1);
    if (diff <= tol_per_area * cell.area()) {
        for (std::size_t k = 0; k < N; ++k)
            out.value[k] += fine[k];
        return;
    }
    if (depth + 1 >= opt.max_depth) {
        out.depth_exceeded = true;
        for (std::size_t k = 0; k < N; ++k)
            out.value[k] += fine[k];
        return;
    }
    for (int c = 0; c < 4; ++c)
        adaptive_cell<N>(fn, kids[c], part[c], depth + 1, tol_per_area, opt, out);
}

} // namespace detail

/// Adaptive integration by recursive 4-way subdivision.
///
/// A cell is accepted once its coarse and subdivided estimates differ by at most
/// tol * area(cell) / area(t) in every component, so the accumulated difference stays
/// below tol. Meant for integrands that are smooth except across curves the mesh does
/// not see.
template <std::size_t N, class F>
AdaptiveResult<N> integrate_adaptive_array(F&& fn, const Triangle& t, AdaptiveOptions opt = {})
{
    if (!opt.rule)
        opt.rule = &six_point_rule();
    AdaptiveResult<N> out;
    const auto coarse = integrate_array<N>(fn, t, *opt.rule);
    if (opt.max_depth <= 0) {
        out.value = coarse;
        return out;
    }
    double tol = opt.tol;
    if (opt.rel_tol > 0.0)
        for (double c : coarse)
            tol = std::max(tol, opt.rel_tol * std::abs(c));
    detail::adaptive_cell<N>(fn, t, coarse, 0, tol / t.area(), opt, out);
    return out;
}

struct AdaptiveScalar
{
    double value = 0.0;
    int reached_depth = 0;
    bool depth_exceeded = false;
};

template <class F>
AdaptiveScalar integrate_adaptive(F&& fn, const Triangle& t, AdaptiveOptions opt = {})
{
    auto wrapped = [&fn](Point x) { return std::array<double, 1>{fn(x)}; };
    const auto r = integrate_adaptive_array<1>(wrapped, t, opt);
    return {r.value[0], r.reached_depth, r.depth_exceeded};
}

} // namespace discafem
