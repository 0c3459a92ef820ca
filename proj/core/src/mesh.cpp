#include "discafem/mesh.hpp"

#include "discafem/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace discafem {

namespace {

std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token)
{
    double v = 0.0;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw MeshError("nvb-mesh: bad number '" + token + "'");
    return v;
}

std::size_t expect_count(std::istream& is, const char* tag)
{
    std::string t;
    long long n = -1;
    if (!(is >> t >> n) || t != tag || n < 0)
        throw MeshError(std::string("nvb-mesh: expected '") + tag + " <count>'");
    return static_cast<std::size_t>(n);
}

} // namespace

void write_mesh(std::ostream& os, const MeshData& mesh)
{
    os << "nvb-mesh v1\n";
    os << "V " << mesh.vertices.size() << '\n';
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const int flag = i < mesh.boundary.size() ? mesh.boundary[i] : 0;
        os << format_double(mesh.vertices[i].x) << ' ' << format_double(mesh.vertices[i].y) << ' ' << flag << '\n';
    }
    os << "T " << mesh.triangles.size() << '\n';
    for (const auto& t : mesh.triangles)
        os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

MeshData read_mesh(std::istream& is)
{
    std::string header;
    std::getline(is, header);
    if (header != "nvb-mesh v1")
        throw MeshError("nvb-mesh: missing 'nvb-mesh v1' header");

    MeshData mesh;
    const std::size_t nv = expect_count(is, "V");
    mesh.vertices.resize(nv);
    mesh.boundary.resize(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        std::string x, y;
        int flag = 0;
        if (!(is >> x >> y >> flag) || (flag != 0 && flag != 1))
            throw MeshError("nvb-mesh: bad vertex line " + std::to_string(i));
        mesh.vertices[i] = {parse_double(x), parse_double(y)};
        mesh.boundary[i] = static_cast<std::uint8_t>(flag);
    }
    const std::size_t nt = expect_count(is, "T");
    mesh.triangles.resize(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        long long a = -1, b = -1, c = -1;
        if (!(is >> a >> b >> c))
            throw MeshError("nvb-mesh: bad triangle line " + std::to_string(i));
        for (long long v : {a, b, c})
            if (v < 0 || static_cast<std::size_t>(v) >= nv)
                throw MeshError("nvb-mesh: vertex index out of range in triangle " + std::to_string(i));
        mesh.triangles[i] = {static_cast<VertexId>(a), static_cast<VertexId>(b), static_cast<VertexId>(c)};
    }
    return mesh;
}

// ---------------------------------------------------------------------------------------

MeshForest MeshForest::load_initial(const std::vector<Point>& vertices,
                                    const std::vector<std::array<VertexId, 3>>& triangles,
                                    const std::vector<int>& newest)
{
    if (triangles.empty())
        throw MeshError("initial mesh has no triangles");
    if (newest.size() != triangles.size())
        throw MeshError("one newest-vertex label per triangle is required");

    MeshForest f;
    f.vertices_.reserve(vertices.size());
    for (const Point& p : vertices) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw MeshError("non-finite vertex coordinate");
        f.vertices_.push_back(Vertex{p});
    }
    f.vertex_use_.assign(vertices.size(), 0);

    // Rotate every triangle so that the newest vertex sits at position 0.
    std::vector<std::array<VertexId, 3>> tris;
    tris.reserve(triangles.size());
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        for (VertexId v : tri)
            if (v >= vertices.size())
                throw MeshError("triangle " + std::to_string(t) + " references a missing vertex");
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw MeshError("triangle " + std::to_string(t) + " repeats a vertex");
        const int k = newest[t];
        if (k < 0 || k > 2)
            throw MeshError("newest-vertex label must be 0, 1 or 2");
        tris.push_back({tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]});
        const Triangle geo{{vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]}};
        const double a = geo.signed_area();
        const double scale = std::max(1.0, geo.diameter() * geo.diameter());
        if (std::abs(a) <= 1e-14 * scale)
            throw MeshError("triangle " + std::to_string(t) + " is degenerate");
        if (a < 0.0)
            throw MeshError("triangle " + std::to_string(t) + " is not positively oriented");
    }

    // Edge incidence: conformity and compatibility.
    std::map<std::uint64_t, std::vector<std::pair<std::size_t, bool>>> incidence;
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const auto& v = tris[t];
        incidence[edge_key(v[0], v[1])].push_back({t, false});
        incidence[edge_key(v[1], v[2])].push_back({t, true});
        incidence[edge_key(v[2], v[0])].push_back({t, false});
    }
    std::vector<std::pair<VertexId, VertexId>> single_edges;
    for (const auto& [key, users] : incidence) {
        const VertexId a = static_cast<VertexId>(key >> 32);
        const VertexId b = static_cast<VertexId>(key & 0xffffffffu);
        if (users.size() > 2)
            throw MeshError("edge shared by more than two triangles: mesh is not conforming");
        if (users.size() == 1) {
            single_edges.push_back({a, b});
            continue;
        }
        if (users[0].second != users[1].second)
            throw MeshError("incompatible labelling: interior edge (" + std::to_string(a) + ", " +
                            std::to_string(b) + ") is the refinement edge of only one neighbour");
    }
    // A vertex strictly inside a single-use edge is a hanging node.
    for (const auto& [a, b] : single_edges) {
        const Point pa = vertices[a];
        const Point pb = vertices[b];
        const Point d = pb - pa;
        const double len2 = dot(d, d);
        for (VertexId v = 0; v < vertices.size(); ++v) {
            if (v == a || v == b)
                continue;
            const Point w = vertices[v] - pa;
            const double s = dot(w, d) / len2;
            if (s <= 0.0 || s >= 1.0)
                continue;
            if (std::abs(cross(d, w)) <= 1e-12 * len2)
                throw MeshError("vertex " + std::to_string(v) + " hangs on edge (" + std::to_string(a) + ", " +
                                std::to_string(b) + "): mesh is not conforming");
        }
    }
    for (const auto& [a, b] : single_edges) {
        f.boundary_edge_keys_.insert(edge_key(a, b));
        f.vertices_[a].on_boundary = true;
        f.vertices_[b].on_boundary = true;
    }

    f.nodes_.reserve(tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
        ElementNode n;
        n.v = tris[t];
        n.root = static_cast<std::uint32_t>(t);
        f.nodes_.push_back(n);
        f.roots_.push_back(static_cast<NodeId>(t));
        f.activate(static_cast<NodeId>(t));
        f.domain_area_ += f.area(static_cast<NodeId>(t));
    }
    return f;
}

MeshForest MeshForest::load_initial(const MeshData& mesh)
{
    MeshForest f = load_initial(mesh.vertices, mesh.triangles, std::vector<int>(mesh.triangles.size(), 0));
    if (!mesh.boundary.empty()) {
        if (mesh.boundary.size() != mesh.vertices.size())
            throw MeshError("boundary flag count does not match vertex count");
        for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
            if ((mesh.boundary[i] != 0) != f.vertices_[i].on_boundary)
                throw MeshError("boundary flag of vertex " + std::to_string(i) + " disagrees with topology");
    }
    return f;
}

// ---------------------------------------------------------------------------------------

Triangle MeshForest::triangle(NodeId id) const
{
    const auto& v = nodes_[id].v;
    return Triangle{{vertices_[v[0]].p, vertices_[v[1]].p, vertices_[v[2]].p}};
}

std::size_t MeshForest::num_active_vertices() const
{
    return static_cast<std::size_t>(std::count_if(vertex_use_.begin(), vertex_use_.end(), [](NodeId u) { return u > 0; }));
}

Partition MeshForest::active_partition() const
{
    Partition p;
    p.reserve(n_active_);
    for (NodeId id = 0; id < nodes_.size(); ++id)
        if (nodes_[id].active)
            p.push_back(id);
    return p;
}

bool MeshForest::lex_less(NodeId a, NodeId b) const
{
    const ElementNode& na = nodes_[a];
    const ElementNode& nb = nodes_[b];
    if (na.generation != nb.generation)
        return na.generation < nb.generation;
    if (na.root != nb.root)
        return na.root < nb.root;
    // Compare paths from the root downwards: bit 0 is the first choice.
    for (std::uint32_t g = 0; g < na.generation; ++g) {
        const bool ba = (na.path[g / 64] >> (g % 64)) & 1u;
        const bool bb = (nb.path[g / 64] >> (g % 64)) & 1u;
        if (ba != bb)
            return !ba;
    }
    return false;
}

bool MeshForest::is_ancestor_or_self(NodeId ancestor, NodeId id) const
{
    const std::uint32_t g = nodes_[ancestor].generation;
    while (id != kNone && nodes_[id].generation > g)
        id = nodes_[id].parent;
    return id == ancestor;
}

// ---------------------------------------------------------------------------------------

VertexId MeshForest::midpoint(VertexId a, VertexId b)
{
    const std::uint64_t key = edge_key(a, b);
    if (auto it = midpoints_.find(key); it != midpoints_.end())
        return it->second;
    Vertex m;
    m.p = 0.5 * (vertices_[a].p + vertices_[b].p);
    m.on_boundary = is_boundary_edge(a, b);
    m.parent_a = std::min(a, b);
    m.parent_b = std::max(a, b);
    const auto id = static_cast<VertexId>(vertices_.size());
    vertices_.push_back(m);
    vertex_use_.push_back(0);
    midpoints_.emplace(key, id);
    if (m.on_boundary) {
        boundary_edge_keys_.insert(edge_key(a, id));
        boundary_edge_keys_.insert(edge_key(id, b));
    }
    return id;
}

NodeId MeshForest::make_child(NodeId parent, int which, std::array<VertexId, 3> v)
{
    const ElementNode& p = nodes_[parent];
    ElementNode c;
    c.v = v;
    c.generation = p.generation + 1;
    c.parent = parent;
    c.root = p.root;
    c.path = p.path;
    if (which == 1)
        c.path[p.generation / 64] |= std::uint64_t{1} << (p.generation % 64);
    const auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(c);
    return id;
}

void MeshForest::activate(NodeId id)
{
    ElementNode& n = nodes_[id];
    n.active = true;
    ++n_active_;
    for (int i = 0; i < 3; ++i) {
        ++vertex_use_[n.v[i]];
        auto& slots = active_edges_.try_emplace(edge_key(n.v[i], n.v[(i + 1) % 3]), std::array<NodeId, 2>{kNone, kNone})
                          .first->second;
        (slots[0] == kNone ? slots[0] : slots[1]) = id;
    }
}

void MeshForest::deactivate(NodeId id)
{
    ElementNode& n = nodes_[id];
    n.active = false;
    --n_active_;
    for (int i = 0; i < 3; ++i) {
        --vertex_use_[n.v[i]];
        auto it = active_edges_.find(edge_key(n.v[i], n.v[(i + 1) % 3]));
        auto& slots = it->second;
        if (slots[0] == id)
            slots[0] = slots[1];
        slots[1] = kNone;
        if (slots[0] == kNone)
            active_edges_.erase(it);
    }
}

std::pair<NodeId, NodeId> MeshForest::bisect(NodeId id, BisectionKind kind)
{
    if (id >= nodes_.size() || !nodes_[id].active)
        throw std::invalid_argument("bisect: element " + std::to_string(id) + " is not active");
    if (nodes_[id].generation + 1 >= kMaxGeneration)
        throw std::length_error("bisect: maximum generation reached");

    if (!nodes_[id].has_children()) {
        const auto [v0, v1, v2] = nodes_[id].v;
        const VertexId m = midpoint(v1, v2);
        const NodeId c0 = make_child(id, 0, {m, v0, v1});
        const NodeId c1 = make_child(id, 1, {m, v2, v0});
        nodes_[id].children = {c0, c1};
    }
    deactivate(id);
    const auto [c0, c1] = nodes_[id].children;
    activate(c0);
    activate(c1);
    if (kind == BisectionKind::marked)
        ++marked_bisections_;
    else
        ++closure_bisections_;
    return {c0, c1};
}

std::size_t MeshForest::refine_marked(std::span<const NodeId> marked)
{
    std::vector<NodeId> ids(marked.begin(), marked.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (NodeId id : ids)
        if (id >= nodes_.size() || !nodes_[id].active)
            throw std::invalid_argument("refine_marked: element " + std::to_string(id) + " is not active");
    for (NodeId id : ids)
        bisect(id, BisectionKind::marked);
    return ids.size();
}

std::size_t MeshForest::refine_uniform()
{
    const Partition all = active_partition();
    return refine_marked(all);
}

bool MeshForest::has_hanging_node(NodeId id) const
{
    const auto& v = nodes_[id].v;
    for (int i = 0; i < 3; ++i) {
        const VertexId a = v[i];
        const VertexId b = v[(i + 1) % 3];
        const std::uint64_t key = edge_key(a, b);
        const auto& slots = active_edges_.at(key);
        if (slots[1] != kNone || boundary_edge_keys_.contains(key))
            continue;
        auto m = midpoints_.find(key);
        if (m != midpoints_.end() && vertex_use_[m->second] > 0)
            return true;
    }
    return false;
}

std::vector<NodeId> MeshForest::hanging_elements() const
{
    std::vector<NodeId> out;
    for (NodeId id = 0; id < nodes_.size(); ++id)
        if (nodes_[id].active && has_hanging_node(id))
            out.push_back(id);
    return out;
}

std::size_t MeshForest::conforming_closure()
{
    std::deque<NodeId> queue;
    for (NodeId id : hanging_elements())
        queue.push_back(id);
    std::size_t count = 0;
    while (!queue.empty()) {
        const NodeId id = queue.front();
        queue.pop_front();
        if (!nodes_[id].active || !has_hanging_node(id))
            continue;
        const VertexId a = nodes_[id].v[1];
        const VertexId b = nodes_[id].v[2];
        const NodeId across = neighbor_across(id, a, b);
        const auto [c0, c1] = bisect(id, BisectionKind::closure);
        ++count;
        queue.push_back(c0);
        queue.push_back(c1);
        if (across != kNone)
            queue.push_back(across);
    }
    return count;
}

bool MeshForest::is_conforming() const
{
    for (const auto& [key, slots] : active_edges_)
        if (slots[1] == kNone && !boundary_edge_keys_.contains(key))
            return false;
    return true;
}

void MeshForest::validate_partition(const Partition& p) const
{
    // Each root must be tiled exactly: dyadic weights 2^-generation sum to one per root, and
    // no element may be an ancestor of another.
    std::vector<long double> weight(roots_.size(), 0.0L);
    std::vector<std::uint8_t> in_set(nodes_.size(), 0);
    for (NodeId id : p) {
        if (id >= nodes_.size())
            throw PartitionMismatchError("partition references unknown element " + std::to_string(id));
        if (in_set[id])
            throw PartitionMismatchError("partition lists element " + std::to_string(id) + " twice");
        in_set[id] = 1;
        weight[nodes_[id].root] += std::ldexp(1.0L, -static_cast<int>(nodes_[id].generation));
    }
    for (NodeId id : p)
        for (NodeId a = nodes_[id].parent; a != kNone; a = nodes_[a].parent)
            if (in_set[a])
                throw PartitionMismatchError("partition contains an element and its ancestor");
    for (std::size_t r = 0; r < roots_.size(); ++r)
        if (std::abs(weight[r] - 1.0L) > 1e-15L)
            throw PartitionMismatchError("partition does not tile root " + std::to_string(r));
}

bool MeshForest::is_refinement(const Partition& fine, const Partition& coarse) const
{
    std::vector<std::uint8_t> in_coarse(nodes_.size(), 0);
    for (NodeId id : coarse)
        in_coarse[id] = 1;
    for (NodeId id : fine) {
        NodeId a = id;
        while (a != kNone && !in_coarse[a])
            a = nodes_[a].parent;
        if (a == kNone)
            return false;
    }
    return true;
}

void MeshForest::set_active(const Partition& partition)
{
    validate_partition(partition);
    for (NodeId id = 0; id < nodes_.size(); ++id)
        if (nodes_[id].active)
            deactivate(id);
    for (NodeId id : partition)
        activate(id);
}

Partition MeshForest::overlay(const Partition& a, const Partition& b) const
{
    validate_partition(a);
    validate_partition(b);
    std::vector<std::uint8_t> in_union(nodes_.size(), 0);
    std::vector<std::uint8_t> has_descendant(nodes_.size(), 0);
    for (NodeId id : a)
        in_union[id] = 1;
    for (NodeId id : b)
        in_union[id] = 1;
    for (NodeId id = 0; id < nodes_.size(); ++id) {
        if (!in_union[id])
            continue;
        for (NodeId p = nodes_[id].parent; p != kNone && !has_descendant[p]; p = nodes_[p].parent)
            has_descendant[p] = 1;
    }
    Partition out;
    for (NodeId id = 0; id < nodes_.size(); ++id)
        if (in_union[id] && !has_descendant[id])
            out.push_back(id);
    return out;
}

// ---------------------------------------------------------------------------------------

NodeId MeshForest::neighbor_across(NodeId self, VertexId a, VertexId b) const
{
    auto it = active_edges_.find(edge_key(a, b));
    if (it == active_edges_.end())
        return kNone;
    const auto& s = it->second;
    if (s[0] == self)
        return s[1];
    if (s[1] == self)
        return s[0];
    return kNone;
}

std::vector<BoundaryEdge> MeshForest::boundary_edges() const
{
    std::vector<BoundaryEdge> out;
    for (NodeId id = 0; id < nodes_.size(); ++id) {
        if (!nodes_[id].active)
            continue;
        const auto& v = nodes_[id].v;
        for (int i = 0; i < 3; ++i)
            if (is_boundary_edge(v[i], v[(i + 1) % 3]))
                out.push_back({v[i], v[(i + 1) % 3], id});
    }
    return out;
}

std::vector<InteriorEdge> MeshForest::interior_edges() const
{
    std::vector<InteriorEdge> out;
    for (NodeId id = 0; id < nodes_.size(); ++id) {
        if (!nodes_[id].active)
            continue;
        const auto& v = nodes_[id].v;
        for (int i = 0; i < 3; ++i) {
            const VertexId a = v[i];
            const VertexId b = v[(i + 1) % 3];
            if (is_boundary_edge(a, b))
                continue;
            const auto& s = active_edges_.at(edge_key(a, b));
            if (s[1] == kNone)
                throw NonConformingError("interior_edges: partition has a hanging node on edge (" +
                                         std::to_string(a) + ", " + std::to_string(b) + ")");
            const NodeId other = s[0] == id ? s[1] : s[0];
            if (id < other)
                out.push_back({a, b, id, other});
        }
    }
    return out;
}

MeshData MeshForest::active_mesh_data() const
{
    MeshData mesh;
    std::vector<VertexId> renumber(vertices_.size(), kNone);
    for (VertexId v = 0; v < vertices_.size(); ++v) {
        if (vertex_use_[v] == 0)
            continue;
        renumber[v] = static_cast<VertexId>(mesh.vertices.size());
        mesh.vertices.push_back(vertices_[v].p);
        mesh.boundary.push_back(vertices_[v].on_boundary ? 1 : 0);
    }
    for (NodeId id = 0; id < nodes_.size(); ++id) {
        if (!nodes_[id].active)
            continue;
        const auto& v = nodes_[id].v;
        mesh.triangles.push_back({renumber[v[0]], renumber[v[1]], renumber[v[2]]});
    }
    return mesh;
}

} // namespace discafem
