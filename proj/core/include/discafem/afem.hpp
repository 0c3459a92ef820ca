#pragma once

#include "discafem/fem.hpp"
#include "discafem/mesh.hpp"

#include <functional>
#include <vector>

namespace discafem {

struct PdeIteration
{
    std::size_t iteration = 0;
    std::size_t dofs = 0;
    double eta = 0.0;
    std::size_t marked = 0;
    std::size_t cg_iterations = 0;
};

struct PdeConfig
{
    double theta = 0.3;
    double cg_rel_tol = 1e-10;
    std::size_t max_inner_iterations = 1000;
    std::size_t max_dofs = 4'000'000;
    /// Receives one record per solve.
    std::function<void(const PdeIteration&)> on_iteration;

    /// Throws std::invalid_argument unless 0 < theta < 1 and cg_rel_tol > 0.
    void validate() const;
};

/// Smallest prefix of the indicators sorted by decreasing value (ties by element id) whose
/// squares sum to at least theta^2 times the total. Empty when the total is zero.
std::vector<NodeId> dorfler_mark(const EstimatorReport& report, double theta);

struct PdeResult
{
    /// Galerkin solution indexed by the dofs of P1Space(forest) on the returned partition.
    std::vector<double> U;
    EstimatorReport report;
    std::size_t inner_iterations = 0;
    std::size_t marked_total = 0;
    std::size_t closure_total = 0;
    std::size_t cg_iterations = 0;
    /// Largest ||b - KU|| / ||b|| over all solves.
    double galerkin_residual = 0.0;
    bool converged = false;
    std::vector<PdeIteration> history;
};

/// Vertex values kept across solves so each solve starts from the prolonged previous one.
class WarmStart
{
public:
    /// Values at the vertices of `space`, filling new midpoints from their parent edges.
    std::vector<double> guess(const P1Space& space);
    void store(const P1Space& space, const std::vector<double>& U);

private:
    std::vector<double> vertex_values_;
    std::vector<std::uint8_t> known_;
};

/// Solve, estimate, mark, refine and close until the estimator drops to eps.
///
/// Ahat and fhat may live on coarser partitions of the same forest. `dirichlet` gives the
/// boundary trace (zero when empty). Stops unconverged when the inner iteration or dof
/// limit is reached; the returned solution then belongs to the last solved partition.
PdeResult pde(MeshForest& forest, const PwPolyMatrix& Ahat, const PwPolyScalar& fhat,
              const std::function<double(Point)>& dirichlet, double eps, const PdeConfig& config,
              WarmStart* warm = nullptr);

/// Assemble and solve once on the forest's active partition.
struct GalerkinSolution
{
    std::vector<double> U;
    std::size_t cg_iterations = 0;
    double residual = 0.0;
};

GalerkinSolution solve_galerkin(const P1Space& space, const PwPolyMatrix& Ahat, const PwPolyScalar& fhat,
                                const std::function<double(Point)>& dirichlet, double cg_rel_tol,
                                const std::vector<double>* guess = nullptr);

} // namespace discafem
