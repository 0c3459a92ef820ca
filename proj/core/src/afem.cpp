#include "discafem/afem.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace discafem {

void PdeConfig::validate() const
{
    if (!(theta > 0.0) || !(theta < 1.0))
        throw std::invalid_argument("Dorfler parameter must lie in (0, 1)");
    if (!(cg_rel_tol > 0.0))
        throw std::invalid_argument("CG tolerance must be positive");
}

std::vector<NodeId> dorfler_mark(const EstimatorReport& report, double theta)
{
    std::vector<std::size_t> order(report.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (report.eta[a] != report.eta[b])
            return report.eta[a] > report.eta[b];
        return report.elements[a] < report.elements[b];
    });
    double total = 0.0;
    for (std::size_t i : order)
        total += report.eta[i] * report.eta[i];
    std::vector<NodeId> marked;
    if (total <= 0.0)
        return marked;
    const double target = theta * theta * total;
    double acc = 0.0;
    for (std::size_t i : order) {
        if (acc >= target)
            break;
        acc += report.eta[i] * report.eta[i];
        marked.push_back(report.elements[i]);
    }
    return marked;
}

std::vector<double> WarmStart::guess(const P1Space& space)
{
    const MeshForest& forest = space.forest();
    const std::size_t nv = forest.num_vertices();
    const std::size_t old = vertex_values_.size();
    vertex_values_.resize(nv, 0.0);
    known_.resize(nv, 0);
    // Parents always carry smaller ids, so one pass in id order suffices.
    for (VertexId v = static_cast<VertexId>(old); v < nv; ++v) {
        const Vertex& vx = forest.vertex(v);
        if (vx.parent_a != kNone && known_[vx.parent_a] && known_[vx.parent_b]) {
            vertex_values_[v] = 0.5 * (vertex_values_[vx.parent_a] + vertex_values_[vx.parent_b]);
            known_[v] = 1;
        }
    }
    std::vector<double> x(space.num_dofs());
    for (std::uint32_t d = 0; d < space.num_dofs(); ++d)
        x[d] = vertex_values_[space.vertex_of_dof(d)];
    return x;
}

void WarmStart::store(const P1Space& space, const std::vector<double>& U)
{
    const std::size_t nv = space.forest().num_vertices();
    vertex_values_.resize(nv, 0.0);
    known_.resize(nv, 0);
    for (std::uint32_t d = 0; d < space.num_dofs(); ++d) {
        vertex_values_[space.vertex_of_dof(d)] = U[d];
        known_[space.vertex_of_dof(d)] = 1;
    }
}

GalerkinSolution solve_galerkin(const P1Space& space, const PwPolyMatrix& Ahat, const PwPolyScalar& fhat,
                                const std::function<double(Point)>& dirichlet, double cg_rel_tol,
                                const std::vector<double>* guess)
{
    LinearSystem sys = assemble(space, Ahat, fhat);
    std::vector<double> g(space.num_dofs(), 0.0);
    if (dirichlet)
        for (std::uint32_t d : space.boundary_dofs())
            g[d] = dirichlet(space.dof_point(d));
    apply_dirichlet(sys, space, g);

    std::vector<double> x0;
    if (guess) {
        x0 = *guess;
        for (std::uint32_t d : space.boundary_dofs())
            x0[d] = g[d];
    }
    CgResult cg = solve_cg(sys, cg_rel_tol, guess ? &x0 : nullptr);
    return {std::move(cg.x), cg.iterations, cg.rel_residual};
}

PdeResult pde(MeshForest& forest, const PwPolyMatrix& Ahat, const PwPolyScalar& fhat,
              const std::function<double(Point)>& dirichlet, double eps, const PdeConfig& config, WarmStart* warm)
{
    config.validate();
    if (!(eps > 0.0))
        throw std::invalid_argument("pde: tolerance must be positive");
    WarmStart local;
    WarmStart& ws = warm ? *warm : local;

    PdeResult res;
    for (std::size_t it = 0;; ++it) {
        const P1Space space(forest);
        const std::vector<double> x0 = ws.guess(space);
        GalerkinSolution sol = solve_galerkin(space, Ahat, fhat, dirichlet, config.cg_rel_tol, &x0);
        ws.store(space, sol.U);
        res.cg_iterations += sol.cg_iterations;
        res.galerkin_residual = std::max(res.galerkin_residual, sol.residual);
        res.report = estimate(space, sol.U, Ahat, fhat);
        res.U = std::move(sol.U);

        PdeIteration rec{it, space.num_dofs(), res.report.total, 0, sol.cg_iterations};
        if (res.report.total <= eps) {
            res.converged = true;
            res.history.push_back(rec);
            if (config.on_iteration)
                config.on_iteration(rec);
            return res;
        }
        if (it >= config.max_inner_iterations || space.num_dofs() >= config.max_dofs) {
            res.history.push_back(rec);
            if (config.on_iteration)
                config.on_iteration(rec);
            return res;
        }
        const std::vector<NodeId> marked = dorfler_mark(res.report, config.theta);
        rec.marked = marked.size();
        res.history.push_back(rec);
        if (config.on_iteration)
            config.on_iteration(rec);
        res.marked_total += forest.refine_marked(marked);
        res.closure_total += forest.conforming_closure();
        ++res.inner_iterations;
    }
}

} // namespace discafem
