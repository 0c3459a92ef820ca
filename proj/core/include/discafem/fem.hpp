#pragma once

#include "discafem/errors.hpp"
#include "discafem/geometry.hpp"
#include "discafem/mesh.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace discafem {

/// Piecewise affine scalar field over a partition of the forest.
struct PwPolyScalar
{
    Partition partition;
    std::vector<Affine> poly; // parallel to partition
};

/// Piecewise affine symmetric matrix field with certified spectral bounds.
struct PwPolyMatrix
{
    Partition partition;
    std::vector<AffineSym2> poly;
    double r_hat = 0.0;
    double M_hat = 0.0;
    bool certified = false;
};

/// Values of a piecewise field on the elements of a finer partition.
///
/// Each element of `fine` inherits the polynomial of the unique element of `coarse` that
/// contains it. Throws PartitionMismatchError if some fine element is not covered.
template <class T>
std::vector<T> restrict_to(const MeshForest& forest, const Partition& coarse, const std::vector<T>& values,
                           const Partition& fine);

/// Continuous piecewise linear space on a conforming active partition.
class P1Space
{
public:
    /// Snapshot of the forest's active partition. Throws NonConformingError on hanging nodes.
    explicit P1Space(const MeshForest& forest);

    const MeshForest& forest() const { return *forest_; }
    const Partition& elements() const { return elements_; }
    std::size_t num_dofs() const { return dof_vertex_.size(); }
    std::size_t num_elements() const { return elements_.size(); }

    VertexId vertex_of_dof(std::uint32_t dof) const { return dof_vertex_[dof]; }
    /// Dof of a vertex, or kNone if the vertex is not used by the partition.
    std::uint32_t dof_of_vertex(VertexId v) const { return v < vertex_dof_.size() ? vertex_dof_[v] : kNone; }
    bool is_boundary_dof(std::uint32_t dof) const { return boundary_[dof] != 0; }
    const std::array<std::uint32_t, 3>& element_dofs(std::size_t e) const { return element_dofs_[e]; }
    const std::vector<std::uint32_t>& boundary_dofs() const { return boundary_dofs_; }
    const std::vector<std::uint32_t>& interior_dofs() const { return interior_dofs_; }

    Point dof_point(std::uint32_t dof) const { return forest_->vertex(dof_vertex_[dof]).p; }

    /// Vertex interpolant of a function.
    std::vector<double> interpolate(const std::function<double(Point)>& g) const;

    /// Gradient of a finite element function on element e (constant per element).
    Point gradient(std::size_t e, const std::vector<double>& U) const;

private:
    const MeshForest* forest_;
    Partition elements_;
    std::vector<std::array<std::uint32_t, 3>> element_dofs_;
    std::vector<VertexId> dof_vertex_;
    std::vector<std::uint32_t> vertex_dof_;
    std::vector<std::uint8_t> boundary_;
    std::vector<std::uint32_t> boundary_dofs_;
    std::vector<std::uint32_t> interior_dofs_;
};

/// Symmetric sparse matrix in compressed row storage (both triangles stored).
struct CsrMatrix
{
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::uint32_t> col;
    std::vector<double> val;

    void multiply(const std::vector<double>& x, std::vector<double>& y) const;
    double entry(std::size_t i, std::size_t j) const;
    std::vector<double> diagonal() const;

    /// Builds a matrix from dense storage, dropping exact zeros off the diagonal.
    static CsrMatrix from_dense(const std::vector<std::vector<double>>& dense);
};

struct LinearSystem
{
    CsrMatrix K;
    std::vector<double> b;
};

/// Galerkin system for -div(Ahat grad u) = fhat.
///
/// Stiffness and load are integrated exactly for affine data (closed forms equal to the
/// 6-point rule). Ahat and fhat may live on any partition coarser than or equal to the
/// space's partition. Throws std::invalid_argument if Ahat is not certified.
LinearSystem assemble(const P1Space& space, const PwPolyMatrix& Ahat, const PwPolyScalar& fhat);

/// Eliminates boundary dofs symmetrically. Boundary rows become identity rows holding g.
void apply_dirichlet(LinearSystem& system, const P1Space& space, const std::vector<double>& g_boundary);

struct CgResult
{
    std::vector<double> x;
    std::size_t iterations = 0;
    double rel_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients to ||b - Kx|| <= rel_tol ||b||.
///
/// Throws ConvergenceError if max_iterations is reached (0 picks 10 n + 100).
CgResult solve_cg(const LinearSystem& system, double rel_tol, const std::vector<double>* x0 = nullptr,
                  std::size_t max_iterations = 0);

/// ||b - Kx|| / ||b|| computed directly (0 when b = 0 and Kx = 0).
double relative_residual(const LinearSystem& system, const std::vector<double>& x);

struct EstimatorReport
{
    Partition elements;
    std::vector<double> eta;
    double total = 0.0;

    std::size_t size() const { return eta.size(); }
};

/// Residual estimator eta_T = diam(T) ||fhat + div(Ahat grad U)||_T + (sum_F |F| ||[Ahat grad U]||_F^2)^(1/2).
///
/// The sum runs over interior edges of T; each edge contributes to both neighbours.
EstimatorReport estimate(const P1Space& space, const std::vector<double>& U, const PwPolyMatrix& Ahat,
                         const PwPolyScalar& fhat);

struct ErrorOptions
{
    std::vector<Point> singular_points;
    int singular_depth = 12;
    int regular_depth = 6;
    double rel_tol = 1e-6;
};

/// ||grad u - grad U||_{L2} with adaptive quadrature on every element.
double h1_seminorm_error(const P1Space& space, const std::vector<double>& U,
                         const std::function<Point(Point)>& grad_exact, const ErrorOptions& options = {});

/// Writes `dof value` lines preceded by a `# mesh <ref>` line.
void write_solution(std::ostream& os, const P1Space& space, const std::vector<double>& U, const std::string& mesh_ref);
/// Writes `element eta` lines in partition order.
void write_estimator(std::ostream& os, const EstimatorReport& report, const std::string& mesh_ref);

// --------------------------------------------------------------------------------------

template <class T>
std::vector<T> restrict_to(const MeshForest& forest, const Partition& coarse, const std::vector<T>& values,
                           const Partition& fine)
{
    if (coarse == fine)
        return values;
    std::vector<std::uint32_t> slot(forest.num_nodes(), kNone);
    for (std::size_t i = 0; i < coarse.size(); ++i)
        slot[coarse[i]] = static_cast<std::uint32_t>(i);
    std::vector<T> out;
    out.reserve(fine.size());
    for (NodeId id : fine) {
        NodeId a = id;
        while (a != kNone && slot[a] == kNone)
            a = forest.node(a).parent;
        if (a == kNone)
            throw PartitionMismatchError("element " + std::to_string(id) + " is not covered by the data partition");
        out.push_back(values[slot[a]]);
    }
    return out;
}

} // namespace discafem
