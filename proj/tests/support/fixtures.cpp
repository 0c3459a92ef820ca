#include "fixtures.hpp"

#include <algorithm>
#include <set>
#include <utility>

namespace fixtures {

MeshData unit_square()
{
    MeshData m;
    m.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    m.triangles = {{1, 2, 0}, {3, 0, 2}};
    return m;
}

MeshData reference_triangle()
{
    MeshData m;
    m.vertices = {{0, 0}, {1, 0}, {0, 1}};
    m.triangles = {{0, 1, 2}};
    return m;
}

double monomial_integral(int a, int b)
{
    double num = 1.0;
    for (int i = 2; i <= a; ++i)
        num *= i;
    for (int i = 2; i <= b; ++i)
        num *= i;
    double den = 1.0;
    for (int i = 2; i <= a + b + 2; ++i)
        den *= i;
    return num / den;
}

void random_refine(MeshForest& forest, std::mt19937_64& rng, std::size_t count)
{
    const auto active = forest.active_partition();
    std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
    std::vector<discafem::NodeId> marked;
    for (std::size_t i = 0; i < count; ++i)
        marked.push_back(active[pick(rng)]);
    forest.refine_marked(marked);
    forest.conforming_closure();
}

long euler_characteristic(const MeshForest& forest)
{
    std::set<std::pair<discafem::VertexId, discafem::VertexId>> edges;
    std::set<discafem::VertexId> verts;
    for (auto id : forest.active_partition()) {
        const auto& v = forest.node(id).v;
        for (int i = 0; i < 3; ++i) {
            verts.insert(v[i]);
            edges.insert(std::minmax(v[i], v[(i + 1) % 3]));
        }
    }
    return long(verts.size()) - long(edges.size()) + long(forest.num_active());
}

double min_active_angle(const MeshForest& forest)
{
    double m = 10.0;
    for (auto id : forest.active_partition())
        m = std::min(m, forest.triangle(id).min_angle());
    return m;
}

} // namespace fixtures
