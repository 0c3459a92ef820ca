#include "discafem/quadrature.hpp"

#include <stdexcept>

namespace discafem {

namespace {

void add_orbit3(QuadratureRule& r, double w, double a)
{
    const double b = 1.0 - 2.0 * a;
    r.points.push_back({b, a, a});
    r.points.push_back({a, b, a});
    r.points.push_back({a, a, b});
    r.weights.insert(r.weights.end(), 3, w);
}

void add_orbit6(QuadratureRule& r, double w, double a, double b)
{
    const double c = 1.0 - a - b;
    for (const auto& p : {std::array{a, b, c}, std::array{a, c, b}, std::array{b, a, c}, std::array{b, c, a},
                          std::array{c, a, b}, std::array{c, b, a}}) {
        r.points.push_back(p);
        r.weights.push_back(w);
    }
}

QuadratureRule make_centroid()
{
    QuadratureRule r;
    r.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
    r.weights = {1.0};
    r.degree = 1;
    return r;
}

QuadratureRule make_edge_midpoint()
{
    QuadratureRule r;
    r.points = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};
    r.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    r.degree = 2;
    return r;
}

// Dunavant's symmetric rules.
QuadratureRule make_six_point()
{
    QuadratureRule r;
    add_orbit3(r, 0.223381589678011, 0.445948490915965);
    add_orbit3(r, 0.109951743655322, 0.091576213509771);
    r.degree = 4;
    return r;
}

QuadratureRule make_sixteen_point()
{
    QuadratureRule r;
    r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(0.144315607677787);
    add_orbit3(r, 0.095091634267285, 0.459292588292723);
    add_orbit3(r, 0.103217370534718, 0.170569307751760);
    add_orbit3(r, 0.032458497623198, 0.050547228317031);
    add_orbit6(r, 0.027230314174435, 0.008394777409958, 0.263112829634638);
    r.degree = 8;
    return r;
}

} // namespace

const QuadratureRule& centroid_rule()
{
    static const QuadratureRule r = make_centroid();
    return r;
}

const QuadratureRule& edge_midpoint_rule()
{
    static const QuadratureRule r = make_edge_midpoint();
    return r;
}

const QuadratureRule& six_point_rule()
{
    static const QuadratureRule r = make_six_point();
    return r;
}

const QuadratureRule& sixteen_point_rule()
{
    static const QuadratureRule r = make_sixteen_point();
    return r;
}

const QuadratureRule& rule_of_degree(int degree)
{
    if (degree <= 1)
        return centroid_rule();
    if (degree == 2)
        return edge_midpoint_rule();
    if (degree <= 4)
        return six_point_rule();
    if (degree <= 8)
        return sixteen_point_rule();
    throw std::invalid_argument("no built-in quadrature rule above degree 8");
}

} // namespace discafem
