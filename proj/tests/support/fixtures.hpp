#pragma once

#include "discafem/mesh.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace fixtures {

using discafem::MeshData;
using discafem::MeshForest;

/// Unit square split along the (0,0)-(1,1) diagonal; both diagonals are refinement edges.
MeshData unit_square();

/// Single triangle (0,0), (1,0), (0,1) with newest vertex (0,0).
MeshData reference_triangle();

/// Reference integral of x^a y^b over the triangle (0,0), (1,0), (0,1).
double monomial_integral(int a, int b);

/// Marks `count` random active elements and closes.
void random_refine(MeshForest& forest, std::mt19937_64& rng, std::size_t count);

/// V - E + T over the active partition, counting edges by enumeration.
long euler_characteristic(const MeshForest& forest);

/// Smallest angle over the active partition.
double min_active_angle(const MeshForest& forest);

} // namespace fixtures
