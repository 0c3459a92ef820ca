#pragma once

#include "discafem/geometry.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace discafem {

using VertexId = std::uint32_t;
using NodeId = std::uint32_t;

inline constexpr std::uint32_t kNone = 0xffffffffu;

/// Deepest generation an element may reach; path bits are stored in 128 bits.
inline constexpr std::uint32_t kMaxGeneration = 128;

struct Vertex
{
    Point p;
    bool on_boundary = false;
    /// Endpoints of the edge this vertex bisects; kNone for vertices of the initial mesh.
    VertexId parent_a = kNone;
    VertexId parent_b = kNone;
};

/// Node of the bisection forest.
///
/// `v[0]` is the newest vertex and the refinement edge is (v[1], v[2]). Vertices are
/// stored counter-clockwise. Bisection creates the midpoint m of the refinement edge and
/// the children (m, v0, v1) and (m, v2, v0), so m is newest in both.
struct ElementNode
{
    std::array<VertexId, 3> v{};
    std::uint32_t generation = 0;
    NodeId parent = kNone;
    std::array<NodeId, 2> children{kNone, kNone};
    std::uint32_t root = 0;
    /// Bit g records which child was taken when going from generation g to g + 1.
    std::array<std::uint64_t, 2> path{};
    bool active = false;

    bool has_children() const { return children[0] != kNone; }
};

/// A set of forest nodes tiling the domain, sorted by id.
using Partition = std::vector<NodeId>;

struct BoundaryEdge
{
    VertexId a;
    VertexId b;
    NodeId element;
};

struct InteriorEdge
{
    VertexId a;
    VertexId b;
    NodeId left;
    NodeId right;
};

/// Plain triangle soup used by the text mesh format; triangle vertex 0 is the newest vertex.
struct MeshData
{
    std::vector<Point> vertices;
    std::vector<std::uint8_t> boundary;
    std::vector<std::array<VertexId, 3>> triangles;

    friend bool operator==(const MeshData&, const MeshData&) = default;
};

/// Writes the `nvb-mesh v1` text format. Coordinates use the shortest round-trip representation.
void write_mesh(std::ostream& os, const MeshData& mesh);
/// Reads the `nvb-mesh v1` text format; throws MeshError on malformed input.
MeshData read_mesh(std::istream& is);

/// Newest-vertex-bisection forest over a polygonal domain.
///
/// The forest owns every element ever created. The active elements form the current
/// partition. Vertices are shared through an edge-to-midpoint table, so topology never
/// depends on floating-point comparisons.
///
/// Mutation is single-writer. Const queries may run concurrently between mutations.
class MeshForest
{
public:
    enum class BisectionKind { marked, closure };

    /// Builds the forest from an initial triangulation.
    ///
    /// `newest[t]` is the local index (0..2) of the newest vertex of triangle t. The mesh
    /// must be conforming, positively oriented and compatibly labelled: an interior edge is
    /// the refinement edge of both adjacent triangles or of neither.
    static MeshForest load_initial(const std::vector<Point>& vertices,
                                   const std::vector<std::array<VertexId, 3>>& triangles,
                                   const std::vector<int>& newest);

    /// Same, with the newest vertex at position 0 of every triangle. Boundary flags present
    /// in `mesh` must agree with the topology.
    static MeshForest load_initial(const MeshData& mesh);

    // --- queries -------------------------------------------------------------------

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_nodes() const { return nodes_.size(); }
    std::size_t num_roots() const { return roots_.size(); }
    std::size_t num_active() const { return n_active_; }
    /// Vertices used by the active partition (the P1 dof count when conforming).
    std::size_t num_active_vertices() const;
    /// Number of bisections separating the active partition from the roots.
    std::size_t n_bisections() const { return n_active_ - roots_.size(); }
    std::size_t marked_bisections() const { return marked_bisections_; }
    std::size_t closure_bisections() const { return closure_bisections_; }

    const Vertex& vertex(VertexId v) const { return vertices_[v]; }
    const ElementNode& node(NodeId id) const { return nodes_[id]; }
    const std::vector<NodeId>& roots() const { return roots_; }
    bool is_active(NodeId id) const { return nodes_[id].active; }

    Triangle triangle(NodeId id) const;
    double area(NodeId id) const { return triangle(id).area(); }
    double diameter(NodeId id) const { return triangle(id).diameter(); }
    double domain_area() const { return domain_area_; }

    /// Active elements sorted by id.
    Partition active_partition() const;

    /// Forest order used to break ties: generation, then root, then bisection path.
    bool lex_less(NodeId a, NodeId b) const;

    bool is_ancestor_or_self(NodeId ancestor, NodeId id) const;

    // --- refinement ----------------------------------------------------------------

    /// Replaces an active element by its two children. Throws std::invalid_argument if the
    /// element is not active.
    std::pair<NodeId, NodeId> bisect(NodeId id, BisectionKind kind = BisectionKind::marked);

    /// Bisects every listed element once. Duplicates are ignored. Returns the number of
    /// bisections. The result may contain hanging nodes.
    std::size_t refine_marked(std::span<const NodeId> marked);

    /// Bisects every active element once.
    std::size_t refine_uniform();

    /// Removes all hanging nodes by further bisections; returns how many were needed.
    std::size_t conforming_closure();

    bool is_conforming() const;

    /// Active elements with at least one hanging node on an edge.
    std::vector<NodeId> hanging_elements() const;

    /// Makes `partition` the active set. Its elements must already exist in the forest.
    void set_active(const Partition& partition);

    /// Smallest common refinement of two partitions of this forest.
    Partition overlay(const Partition& a, const Partition& b) const;

    /// Throws PartitionMismatchError unless `p` is a partition of the forest's domain.
    void validate_partition(const Partition& p) const;

    /// True if every element of `fine` lies inside some element of `coarse`.
    bool is_refinement(const Partition& fine, const Partition& coarse) const;

    // --- adjacency of the active partition ------------------------------------------

    std::vector<BoundaryEdge> boundary_edges() const;
    /// Throws NonConformingError if the active partition has hanging nodes.
    std::vector<InteriorEdge> interior_edges() const;

    /// Active element sharing the edge (a, b) with `self`, or kNone.
    NodeId neighbor_across(NodeId self, VertexId a, VertexId b) const;

    /// Active mesh with vertices renumbered compactly in increasing id order.
    MeshData active_mesh_data() const;

private:
    static std::uint64_t edge_key(VertexId a, VertexId b)
    {
        if (a > b)
            std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | b;
    }

    VertexId midpoint(VertexId a, VertexId b);
    NodeId make_child(NodeId parent, int which, std::array<VertexId, 3> v);
    void activate(NodeId id);
    void deactivate(NodeId id);
    bool has_hanging_node(NodeId id) const;
    bool is_boundary_edge(VertexId a, VertexId b) const { return boundary_edge_keys_.contains(edge_key(a, b)); }

    std::vector<Vertex> vertices_;
    std::vector<NodeId> vertex_use_;
    std::vector<ElementNode> nodes_;
    std::vector<NodeId> roots_;
    std::unordered_map<std::uint64_t, VertexId> midpoints_;
    std::unordered_map<std::uint64_t, std::array<NodeId, 2>> active_edges_;
    std::unordered_set<std::uint64_t> boundary_edge_keys_;
    std::size_t n_active_ = 0;
    std::size_t marked_bisections_ = 0;
    std::size_t closure_bisections_ = 0;
    double domain_area_ = 0.0;
};

} // namespace discafem
