#include "discafem/cases.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace discafem {

namespace {

constexpr double pi = std::numbers::pi;

class MeshBuilder
{
public:
    VertexId vertex(Point p)
    {
        const auto key = std::make_pair(p.x, p.y);
        if (auto it = ids_.find(key); it != ids_.end())
            return it->second;
        const auto id = static_cast<VertexId>(mesh_.vertices.size());
        mesh_.vertices.push_back(p);
        ids_.emplace(key, id);
        return id;
    }

    // Square with corners o and d split along the o-d diagonal; both right-angle corners are newest.
    void square(Point o, Point d)
    {
        const Point p{d.x, o.y};
        const Point q{o.x, d.y};
        triangle(p, o, d);
        triangle(q, d, o);
    }

    MeshData take() { return std::move(mesh_); }

private:
    void triangle(Point newest, Point a, Point b)
    {
        if (cross(a - newest, b - newest) < 0.0)
            std::swap(a, b);
        mesh_.triangles.push_back({vertex(newest), vertex(a), vertex(b)});
    }

    MeshData mesh_;
    std::map<std::pair<double, double>, VertexId> ids_;
};

// Angle measured from the positive y axis, in [0, 2 pi).
double lshaped_angle(Point x)
{
    double d = std::atan2(x.y, x.x) - 0.5 * pi;
    if (d < 0.0)
        d += 2.0 * pi;
    return d;
}

double angle_around(Point x, Point c)
{
    double d = std::atan2(x.y - c.y, x.x - c.x);
    if (d < 0.0)
        d += 2.0 * pi;
    return d;
}

Point polar_gradient(double dr, double dtheta_over_rho, double theta)
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {dr * c - dtheta_over_rho * s, dr * s + dtheta_over_rho * c};
}

} // namespace

TestCase lshaped_case()
{
    constexpr double rho0 = kLshapedRho0;
    constexpr double mu = kLshapedOuter;
    const double slope = 2.0 / (3.0 * mu) * std::pow(rho0, -1.0 / 3.0);
    const double base = std::pow(rho0, 2.0 / 3.0);

    TestCase tc;
    tc.name = "lshaped";
    MeshBuilder mb;
    mb.square({0, 0}, {-5, 5});
    mb.square({0, 0}, {-5, -5});
    mb.square({0, 0}, {5, -5});
    tc.initial_mesh = mb.take();

    tc.exact = [=](Point x) {
        const double rho = norm(x);
        const double s = std::sin(2.0 / 3.0 * lshaped_angle(x));
        if (rho <= rho0)
            return std::pow(rho, 2.0 / 3.0) * s;
        return s * (base + slope * (rho - rho0));
    };
    tc.exact_gradient = [=](Point x) {
        const double rho = norm(x);
        if (rho == 0.0)
            return Point{0.0, 0.0};
        const double d = lshaped_angle(x);
        const double s = std::sin(2.0 / 3.0 * d);
        const double c = std::cos(2.0 / 3.0 * d);
        const double theta = d + 0.5 * pi;
        if (rho <= rho0) {
            const double r13 = std::pow(rho, -1.0 / 3.0);
            return polar_gradient(2.0 / 3.0 * r13 * s, 2.0 / 3.0 * r13 * c, theta);
        }
        const double R = base + slope * (rho - rho0);
        return polar_gradient(slope * s, R * 2.0 / 3.0 * c / rho, theta);
    };
    tc.oracle.A = [](Point x) { return SymMat2::identity(norm(x) <= rho0 ? 1.0 : mu); };
    tc.oracle.f = [=](Point x) {
        const double rho = norm(x);
        if (rho <= rho0)
            return 0.0;
        const double s = std::sin(2.0 / 3.0 * lshaped_angle(x));
        const double R = base + slope * (rho - rho0);
        return -mu * s * (slope / rho - 4.0 / 9.0 * R / (rho * rho));
    };
    tc.oracle.r = 1.0;
    tc.oracle.M = mu;
    tc.singular_points = {{0.0, 0.0}};
    tc.oracle.singular_points = tc.singular_points;
    return tc;
}

std::array<double, 3> kellogg_residuals(const KelloggParams& p)
{
    const double a = p.alpha;
    const double cot_q = 1.0 / std::tan(pi / 4.0 * a);
    return {p.b + std::tan((pi / 2.0 - p.sigma) * a) * cot_q,
            1.0 / p.b + std::tan(pi / 4.0 * a) / std::tan(p.sigma * a),
            p.b + std::tan(a * p.sigma) * cot_q};
}

bool kellogg_constraints_hold(const KelloggParams& p)
{
    const double a = p.alpha;
    const bool first = std::max(0.0, pi * (a - 1.0)) < pi / 2.0 * a && pi / 2.0 * a < std::min(pi * a, pi);
    const double s = -2.0 * a * p.sigma;
    const bool second = std::max(0.0, pi * (1.0 - a)) < s && s < std::min(pi, pi * (2.0 - a));
    return first && second;
}

double kellogg_mu(const KelloggParams& p, double d)
{
    const double a = p.alpha;
    const double s = p.sigma;
    if (d < pi / 2.0)
        return std::cos((pi / 2.0 - s) * a) * std::cos((d - pi / 4.0) * a);
    if (d < pi)
        return std::cos(pi / 4.0 * a) * std::cos((d - pi + s) * a);
    if (d < 1.5 * pi)
        return std::cos(a * s) * std::cos((d - 1.25 * pi) * a);
    return std::cos(pi / 4.0 * a) * std::cos((d - 1.5 * pi - s) * a);
}

double kellogg_mu_prime(const KelloggParams& p, double d)
{
    const double a = p.alpha;
    const double s = p.sigma;
    if (d < pi / 2.0)
        return -a * std::cos((pi / 2.0 - s) * a) * std::sin((d - pi / 4.0) * a);
    if (d < pi)
        return -a * std::cos(pi / 4.0 * a) * std::sin((d - pi + s) * a);
    if (d < 1.5 * pi)
        return -a * std::cos(a * s) * std::sin((d - 1.25 * pi) * a);
    return -a * std::cos(pi / 4.0 * a) * std::sin((d - 1.5 * pi - s) * a);
}

TestCase kellogg_case()
{
    const KelloggParams kp;
    const Point c{std::sqrt(2.0) / 10.0, std::sqrt(2.0) / 10.0};

    TestCase tc;
    tc.name = "kellogg";
    MeshBuilder mb;
    mb.square({0, 0}, {1, 1});
    mb.square({0, 0}, {-1, 1});
    mb.square({0, 0}, {-1, -1});
    mb.square({0, 0}, {1, -1});
    tc.initial_mesh = mb.take();

    tc.exact = [=](Point x) {
        const double rho = norm(x - c);
        return std::pow(rho, kp.alpha) * kellogg_mu(kp, angle_around(x, c));
    };
    tc.exact_gradient = [=](Point x) {
        const double rho = norm(x - c);
        if (rho == 0.0)
            return Point{0.0, 0.0};
        const double d = angle_around(x, c);
        const double ra = std::pow(rho, kp.alpha - 1.0);
        return polar_gradient(kp.alpha * ra * kellogg_mu(kp, d), ra * kellogg_mu_prime(kp, d), d);
    };
    tc.oracle.A = [=](Point x) { return SymMat2::identity((x.x - c.x) * (x.y - c.y) >= 0.0 ? kp.b : 1.0); };
    tc.oracle.f = [](Point) { return 0.0; };
    tc.oracle.r = 1.0;
    tc.oracle.M = kp.b;
    tc.singular_points = {c};
    tc.oracle.singular_points = tc.singular_points;
    return tc;
}

TestCase smooth_case()
{
    TestCase tc;
    tc.name = "smooth";
    MeshBuilder mb;
    const Point m{0.5, 0.5};
    mb.square(m, {1, 1});
    mb.square(m, {0, 1});
    mb.square(m, {0, 0});
    mb.square(m, {1, 0});
    tc.initial_mesh = mb.take();

    tc.exact = [](Point x) { return std::sin(pi * x.x) * std::sin(pi * x.y); };
    tc.exact_gradient = [](Point x) {
        return Point{pi * std::cos(pi * x.x) * std::sin(pi * x.y), pi * std::sin(pi * x.x) * std::cos(pi * x.y)};
    };
    tc.oracle.A = [](Point) { return SymMat2::identity(); };
    tc.oracle.f = [](Point x) { return 2.0 * pi * pi * std::sin(pi * x.x) * std::sin(pi * x.y); };
    tc.oracle.r = 1.0;
    tc.oracle.M = 1.0;
    return tc;
}

TestCase make_case(const std::string& name)
{
    if (name == "lshaped")
        return lshaped_case();
    if (name == "kellogg")
        return kellogg_case();
    if (name == "smooth")
        return smooth_case();
    throw std::out_of_range("unknown test case '" + name + "'");
}

} // namespace discafem
