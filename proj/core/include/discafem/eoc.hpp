#pragma once

#include "discafem/geometry.hpp"
#include "discafem/mesh.hpp"

#include <cstddef>
#include <vector>

namespace discafem {

struct EocPoint
{
    double dofs = 0.0;
    double error = 0.0;
};

struct EocReport
{
    std::vector<EocPoint> points;
    /// Least-squares slope over the last `window` points.
    double asymptotic = 0.0;
    /// Slope over the remaining points; NaN when fewer than two remain.
    double preasymptotic = 0.0;
    std::size_t window = 0;
};

/// Least-squares slope of log(error) against log(dofs). Needs two or more positive points.
double loglog_slope(const std::vector<EocPoint>& points);

/// Asymptotic slope over the last `window` points and preasymptotic slope over the rest.
/// Throws std::invalid_argument with fewer than three points or non-positive values.
EocReport eoc(const std::vector<EocPoint>& points, std::size_t window = 6);

/// Keeps, for each dof count, the last point and drops points whose dof count does not
/// exceed an earlier one.
std::vector<EocPoint> strictly_increasing(const std::vector<EocPoint>& points);

struct AnnulusStats
{
    int level = 0;
    std::size_t count = 0;
    double min_diameter = 0.0;
    double max_diameter = 0.0;
};

/// Diameter statistics of the active elements whose centroid lies in 2^-(j+1) < |x - c| < 2^-j,
/// for j = 0 .. levels-1. Empty annuli have count zero.
std::vector<AnnulusStats> annulus_grading(const MeshForest& forest, Point center, int levels);

} // namespace discafem
