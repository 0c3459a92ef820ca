#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace discafem {

struct Point
{
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point a, Point b) = default;
};

constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct SymMat2
{
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    static constexpr SymMat2 identity(double s = 1.0) { return {s, 0.0, s}; }

    constexpr Point apply(Point v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }

    double lambda_min() const
    {
        const double m = 0.5 * (xx + yy);
        return m - std::hypot(0.5 * (xx - yy), xy);
    }
    double lambda_max() const
    {
        const double m = 0.5 * (xx + yy);
        return m + std::hypot(0.5 * (xx - yy), xy);
    }
    /// Spectral norm.
    double norm2() const { return std::max(std::abs(lambda_min()), std::abs(lambda_max())); }

    friend constexpr SymMat2 operator+(SymMat2 a, SymMat2 b) { return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}; }
    friend constexpr SymMat2 operator-(SymMat2 a, SymMat2 b) { return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy}; }
    friend constexpr SymMat2 operator*(double s, SymMat2 a) { return {s * a.xx, s * a.xy, s * a.yy}; }
    friend constexpr bool operator==(SymMat2 a, SymMat2 b) = default;
};

struct Triangle
{
    std::array<Point, 3> p;

    /// Signed area, positive for counter-clockwise vertex order.
    double signed_area() const { return 0.5 * cross(p[1] - p[0], p[2] - p[0]); }
    double area() const { return std::abs(signed_area()); }

    double diameter() const
    {
        return std::max({norm(p[1] - p[0]), norm(p[2] - p[1]), norm(p[0] - p[2])});
    }

    Point centroid() const { return (1.0 / 3.0) * (p[0] + p[1] + p[2]); }

    Point from_barycentric(const std::array<double, 3>& l) const
    {
        return {l[0] * p[0].x + l[1] * p[1].x + l[2] * p[2].x,
                l[0] * p[0].y + l[1] * p[1].y + l[2] * p[2].y};
    }

    /// Gradients of the three barycentric coordinates (constant on the triangle).
    std::array<Point, 3> barycentric_gradients() const
    {
        const double twice = 2.0 * signed_area();
        std::array<Point, 3> g;
        for (int i = 0; i < 3; ++i) {
            const Point a = p[(i + 1) % 3];
            const Point b = p[(i + 2) % 3];
            g[i] = {(a.y - b.y) / twice, (b.x - a.x) / twice};
        }
        return g;
    }

    bool contains(Point q, double slack = 0.0) const
    {
        const double twice = 2.0 * signed_area();
        for (int i = 0; i < 3; ++i) {
            const Point a = p[(i + 1) % 3];
            const Point b = p[(i + 2) % 3];
            if (cross(b - a, q - a) / twice < -slack)
                return false;
        }
        return true;
    }

    /// Smallest interior angle in radians.
    double min_angle() const
    {
        double best = std::numbers::pi;
        for (int i = 0; i < 3; ++i) {
            const Point u = p[(i + 1) % 3] - p[i];
            const Point v = p[(i + 2) % 3] - p[i];
            best = std::min(best, std::atan2(std::abs(cross(u, v)), dot(u, v)));
        }
        return best;
    }
};

/// Affine scalar function c0 + cx*x + cy*y in global coordinates.
struct Affine
{
    double c0 = 0.0;
    double cx = 0.0;
    double cy = 0.0;

    static constexpr Affine constant(double c) { return {c, 0.0, 0.0}; }

    /// The affine function taking the given values at the triangle's vertices.
    static Affine interpolate(const Triangle& t, const std::array<double, 3>& values)
    {
        const auto g = t.barycentric_gradients();
        Affine a;
        a.cx = values[0] * g[0].x + values[1] * g[1].x + values[2] * g[2].x;
        a.cy = values[0] * g[0].y + values[1] * g[1].y + values[2] * g[2].y;
        const Point c = t.centroid();
        a.c0 = (values[0] + values[1] + values[2]) / 3.0 - a.cx * c.x - a.cy * c.y;
        return a;
    }

    constexpr double operator()(Point q) const { return c0 + cx * q.x + cy * q.y; }
    constexpr bool is_constant() const { return cx == 0.0 && cy == 0.0; }

    friend constexpr Affine operator+(Affine a, Affine b) { return {a.c0 + b.c0, a.cx + b.cx, a.cy + b.cy}; }
    friend constexpr Affine operator*(double s, Affine a) { return {s * a.c0, s * a.cx, s * a.cy}; }
    friend constexpr bool operator==(Affine a, Affine b) = default;
};

/// Symmetric 2x2 matrix with affine entries.
struct AffineSym2
{
    Affine xx;
    Affine xy;
    Affine yy;

    static constexpr AffineSym2 constant(SymMat2 m)
    {
        return {Affine::constant(m.xx), Affine::constant(m.xy), Affine::constant(m.yy)};
    }

    constexpr SymMat2 operator()(Point q) const { return {xx(q), xy(q), yy(q)}; }

    /// Divergence of (this * g) for a constant vector g.
    constexpr double divergence_times(Point g) const
    {
        return xx.cx * g.x + xy.cx * g.y + xy.cy * g.x + yy.cy * g.y;
    }

    constexpr bool is_constant() const { return xx.is_constant() && xy.is_constant() && yy.is_constant(); }

    friend constexpr AffineSym2 operator*(double s, AffineSym2 a) { return {s * a.xx, s * a.xy, s * a.yy}; }
    friend constexpr bool operator==(const AffineSym2& a, const AffineSym2& b) = default;
};

} // namespace discafem
