#include "discafem/eoc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace discafem {

double loglog_slope(const std::vector<EocPoint>& points)
{
    if (points.size() < 2)
        throw std::invalid_argument("slope needs at least two points");
    double sx = 0.0, sy = 0.0;
    for (const EocPoint& p : points) {
        if (!(p.dofs > 0.0) || !(p.error > 0.0))
            throw std::invalid_argument("slope needs positive dofs and errors");
        sx += std::log(p.dofs);
        sy += std::log(p.error);
    }
    const double n = double(points.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const EocPoint& p : points) {
        const double dx = std::log(p.dofs) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(p.error) - my);
    }
    if (sxx == 0.0)
        throw std::invalid_argument("slope needs at least two distinct dof counts");
    return sxy / sxx;
}

EocReport eoc(const std::vector<EocPoint>& points, std::size_t window)
{
    if (points.size() < 3)
        throw std::invalid_argument("EOC needs at least three points");
    EocReport rep;
    rep.points = points;
    rep.window = std::min(window, points.size());
    const auto split = points.end() - static_cast<std::ptrdiff_t>(rep.window);
    rep.asymptotic = loglog_slope({split, points.end()});
    const std::vector<EocPoint> rest(points.begin(), split);
    rep.preasymptotic = rest.size() >= 2 ? loglog_slope(rest) : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

std::vector<EocPoint> strictly_increasing(const std::vector<EocPoint>& points)
{
    std::vector<EocPoint> out;
    for (const EocPoint& p : points) {
        if (!out.empty() && p.dofs == out.back().dofs)
            out.back() = p;
        else if (out.empty() || p.dofs > out.back().dofs)
            out.push_back(p);
    }
    return out;
}

std::vector<AnnulusStats> annulus_grading(const MeshForest& forest, Point center, int levels)
{
    if (levels < 1)
        throw std::invalid_argument("annulus_grading needs at least one level");
    std::vector<AnnulusStats> out(static_cast<std::size_t>(levels));
    for (int j = 0; j < levels; ++j) {
        out[j].level = j;
        out[j].min_diameter = std::numeric_limits<double>::infinity();
    }
    for (NodeId id : forest.active_partition()) {
        const Triangle t = forest.triangle(id);
        const double rho = norm(t.centroid() - center);
        if (!(rho > 0.0) || rho >= 1.0)
            continue;
        const int j = static_cast<int>(std::floor(-std::log2(rho)));
        if (j >= levels || rho >= std::ldexp(1.0, -j) || rho <= std::ldexp(1.0, -(j + 1)))
            continue;
        AnnulusStats& s = out[static_cast<std::size_t>(j)];
        const double d = t.diameter();
        ++s.count;
        s.min_diameter = std::min(s.min_diameter, d);
        s.max_diameter = std::max(s.max_diameter, d);
    }
    for (AnnulusStats& s : out)
        if (s.count == 0)
            s.min_diameter = 0.0;
    return out;
}

} // namespace discafem
