#pragma once

#include "discafem/data_approx.hpp"
#include "discafem/mesh.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace discafem {

/// Benchmark problem with exact solution.
struct TestCase
{
    std::string name;
    MeshData initial_mesh; // newest vertex at position 0
    CoefficientOracle oracle;
    std::function<double(Point)> exact;
    std::function<Point(Point)> exact_gradient;
    /// Points where the exact gradient is singular.
    std::vector<Point> singular_points;
};

/// L-shaped domain [-5,5]^2 minus [0,5]^2 with a coefficient jump (1 to 5) on the circle
/// of radius 2 sqrt(2) around the reentrant corner.
TestCase lshaped_case();

/// Checkerboard coefficient on (-1,1)^2 with cross point (sqrt(2)/10, sqrt(2)/10) and exponent 1/4.
TestCase kellogg_case();

/// Unit square, A = I, u = sin(pi x) sin(pi y).
TestCase smooth_case();

/// Case by name; throws std::out_of_range for unknown names.
TestCase make_case(const std::string& name);

struct KelloggParams
{
    double alpha = 0.25;
    double b = 25.27414236908818;
    double sigma = -5.49778714378214;
};

/// Residuals of the three relations tying b, alpha and sigma together.
std::array<double, 3> kellogg_residuals(const KelloggParams& p);

/// Both constraint inequalities hold strictly.
bool kellogg_constraints_hold(const KelloggParams& p);

/// Angular factor of the checkerboard solution, delta in [0, 2 pi).
double kellogg_mu(const KelloggParams& p, double delta);

/// Angular derivative of kellogg_mu.
double kellogg_mu_prime(const KelloggParams& p, double delta);

/// Coefficient jump radius and outer value of the L-shaped case.
inline constexpr double kLshapedRho0 = 2.8284271247461903; // 2 sqrt(2)
inline constexpr double kLshapedOuter = 5.0;

} // namespace discafem
