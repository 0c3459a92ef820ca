#include "discafem/disc.hpp"

#include "discafem/errors.hpp"
#include "discafem/quadrature.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace discafem {

void DiscConfig::validate() const
{
    if (!(eps0 > 0.0))
        throw std::invalid_argument("eps0 must be positive");
    if (!(omega > 0.0 && omega < 1.0))
        throw std::invalid_argument("omega must lie in (0, 1)");
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("beta must lie in (0, 1)");
    if (!(q >= 2.0))
        throw std::invalid_argument("q must be at least 2");
    if (degree_A != 0 && degree_A != 1)
        throw std::invalid_argument("degree of the coefficient approximation must be 0 or 1");
    if (max_outer_iterations == 0 || max_dofs == 0)
        throw std::invalid_argument("iteration and dof limits must be positive");
    pde.validate();
}

DiscTrace disc(MeshForest& forest, const DiscProblem& problem, const DiscConfig& config,
               const std::function<void(const DiscRow&)>& on_row)
{
    config.validate();
    problem.oracle.validate();

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();

    FitOptions fit = config.fit;
    if (fit.singular_points.empty())
        fit.singular_points = problem.oracle.singular_points;
    OscillationFitter f_fit(problem.oracle.f, fit);
    MatrixFitter A_fit(problem.oracle.A, config.q, config.degree_A, fit);
    WarmStart warm;

    GreedyOptions gopt;
    gopt.max_elements = config.max_elements;
    PdeConfig pcfg = config.pde;
    pcfg.max_dofs = std::max(pcfg.max_dofs, 4 * config.max_dofs);

    DiscTrace trace;
    trace.initial_elements = forest.num_roots();
    double eps = config.eps0;
    for (std::size_t k = 0; k < config.max_outer_iterations; ++k, eps *= config.beta) {
        DiscRow row;
        row.k = k;
        row.eps = eps;
        const char* stage = "rhs";
        try {
            const RhsResult rf = rhs(forest, f_fit, config.omega * eps, gopt);
            row.n_f = rf.marked_count;
            row.closure_f = rf.closure_count;
            row.osc = rf.osc;
            row.dofs_rhs = forest.num_active_vertices();

            stage = "coeff";
            const CoeffResult rc = coeff(forest, A_fit, problem.oracle, config.omega * eps, gopt);
            row.n_A = rc.marked_count;
            row.closure_A = rc.closure_count;
            row.coeff_error = rc.error;
            row.r_hat = rc.Ahat.r_hat;
            row.M_hat = rc.Ahat.M_hat;
            row.repaired = rc.repaired;
            row.dofs_coeff = forest.num_active_vertices();

            stage = "pde";
            const PdeResult ru = pde(forest, rc.Ahat, rf.fhat, problem.dirichlet, 0.5 * eps, pcfg, &warm);
            row.n_u = ru.marked_total;
            row.closure_u = ru.closure_total;
            row.eta = ru.report.total;
            row.inner_iterations = ru.inner_iterations;
            row.cg_iterations = ru.cg_iterations;
            row.galerkin_residual = ru.galerkin_residual;
            row.dofs_pde = forest.num_active_vertices();
            row.elements = forest.num_active();
            if (!ru.converged)
                throw ConvergenceError("pde: iteration or dof limit reached", ru.report.total, 0.5 * eps,
                                       row.dofs_pde);

            if (problem.exact_gradient) {
                const P1Space space(forest);
                row.energy_error = h1_seminorm_error(space, ru.U, problem.exact_gradient, config.error);
            } else {
                row.energy_error = std::numeric_limits<double>::quiet_NaN();
            }
        } catch (const ConvergenceError& e) {
            trace.failure = DiscFailure{k, stage, e.what(), e.reached(), e.target()};
            break;
        }
        const std::size_t marked = forest.marked_bisections();
        row.closure_ratio =
            marked > 0 ? double(forest.num_active() - trace.initial_elements) / double(marked) : 0.0;
        row.seconds = config.record_time ? std::chrono::duration<double>(clock::now() - start).count() : 0.0;
        trace.rows.push_back(row);
        if (on_row)
            on_row(row);
        if (row.dofs_pde >= config.max_dofs)
            break;
    }
    return trace;
}

namespace {

void put(std::ostream& os, double v)
{
    if (std::isnan(v))
        os << "nan";
    else
        os << v;
}

} // namespace

void write_trace_csv(std::ostream& os, const DiscTrace& trace)
{
    os.precision(10);
    os << "k,eps_k,dofs_rhs,dofs_coeff,dofs_pde,Nf,NA,Nu,eta,energy_error,seconds\n";
    for (const DiscRow& r : trace.rows) {
        os << r.k << ',';
        put(os, r.eps);
        os << ',' << r.dofs_rhs << ',' << r.dofs_coeff << ',' << r.dofs_pde << ',' << r.n_f << ',' << r.n_A << ','
           << r.n_u << ',';
        put(os, r.eta);
        os << ',';
        put(os, r.energy_error);
        os << ',';
        put(os, r.seconds);
        os << '\n';
    }
}

void write_diagnostics_csv(std::ostream& os, const DiscTrace& trace)
{
    os.precision(10);
    os << "k,osc,coeff_error,r_hat,M_hat,inner_iterations,elements,closure_ratio,galerkin_residual,cg_iterations,"
          "repaired,closure_f,closure_A,closure_u\n";
    for (const DiscRow& r : trace.rows) {
        os << r.k << ',';
        put(os, r.osc);
        os << ',';
        put(os, r.coeff_error);
        os << ',';
        put(os, r.r_hat);
        os << ',';
        put(os, r.M_hat);
        os << ',' << r.inner_iterations << ',' << r.elements << ',';
        put(os, r.closure_ratio);
        os << ',';
        put(os, r.galerkin_residual);
        os << ',' << r.cg_iterations << ',' << r.repaired << ',' << r.closure_f << ',' << r.closure_A << ','
           << r.closure_u << '\n';
    }
}

// ---------------------------------------------------------------------------------------

PerturbationResult perturbation_check(const MeshForest& forest, const CoefficientOracle& oracle,
                                      const PwPolyMatrix& Ahat, int fine_levels, double p,
                                      const std::function<double(Point)>& dirichlet, double cg_rel_tol,
                                      const FitOptions& fit)
{
    if (!Ahat.certified)
        throw std::invalid_argument("perturbation_check: Ahat is not certified");
    if (!(p > 2.0))
        throw std::invalid_argument("perturbation_check: p must exceed 2");
    const double q = std::isinf(p) ? 2.0 : 2.0 * p / (p - 2.0);

    MeshForest fine = forest;
    fine.set_active(Ahat.partition);
    for (int i = 0; i < fine_levels; ++i)
        fine.refine_uniform();
    fine.conforming_closure();
    const P1Space space(fine);

    PwPolyMatrix A_mean;
    PwPolyScalar f_mean;
    A_mean.partition = f_mean.partition = space.elements();
    for (NodeId id : space.elements()) {
        const Triangle T = fine.triangle(id);
        A_mean.poly.push_back(local_best_matrix(oracle.A, T, 2.0, 0, fit).best);
        f_mean.poly.push_back(local_best(oracle.f, T, 2.0, 0, fit).best);
    }
    A_mean.r_hat = oracle.r;
    A_mean.M_hat = oracle.M;
    A_mean.certified = true;

    const auto u = solve_galerkin(space, A_mean, f_mean, dirichlet, cg_rel_tol);
    const auto uhat = solve_galerkin(space, Ahat, f_mean, dirichlet, cg_rel_tol);

    const auto Ah = restrict_to(fine, Ahat.partition, Ahat.poly, space.elements());
    double lhs2 = 0.0;
    double diff_q = 0.0;
    double grad_p = 0.0;
    AdaptiveOptions aopt;
    aopt.tol = 0.0;
    aopt.rel_tol = fit.rel_tol;
    aopt.max_depth = fit.max_depth;
    for (std::size_t e = 0; e < space.num_elements(); ++e) {
        const Triangle T = fine.triangle(space.elements()[e]);
        const double area = T.area();
        const Point gu = space.gradient(e, u.U);
        const Point d = gu - space.gradient(e, uhat.U);
        lhs2 += area * dot(d, d);
        const auto diff = [&](Point x) { return std::pow((oracle.A(x) - Ah[e](x)).norm2(), q); };
        const double I = integrate_adaptive(diff, T, aopt).value;
        if (I <= 0.0)
            continue;
        diff_q += I;
        const double g = norm(gu);
        grad_p = std::isinf(p) ? std::max(grad_p, g) : grad_p + area * std::pow(g, p);
    }
    if (!std::isinf(p))
        grad_p = std::pow(grad_p, 1.0 / p);

    PerturbationResult res;
    res.fine_elements = space.num_elements();
    res.lhs = std::sqrt(lhs2);
    res.rhs = grad_p * std::pow(diff_q, 1.0 / q) / Ahat.r_hat;
    res.ratio = res.rhs > 0.0 ? res.lhs / res.rhs : (res.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return res;
}

ScalingResult scaling_identity_check(const MeshForest& forest, const PwPolyMatrix& A, const PwPolyScalar& f,
                                     double delta, double s, double cg_rel_tol)
{
    const double factor = 1.0 + delta / s;
    PwPolyMatrix A2 = A;
    for (AffineSym2& m : A2.poly)
        m = (1.0 / factor) * m;
    A2.r_hat = A.r_hat / factor;
    A2.M_hat = A.M_hat / factor;

    const P1Space space(forest);
    const auto u1 = solve_galerkin(space, A, f, {}, cg_rel_tol);
    const auto u2 = solve_galerkin(space, A2, f, {}, cg_rel_tol);
    ScalingResult res;
    for (std::size_t i = 0; i < u1.U.size(); ++i) {
        res.deviation = std::max(res.deviation, std::abs(u2.U[i] - factor * u1.U[i]));
        res.u1_norm = std::max(res.u1_norm, std::abs(u1.U[i]));
    }
    return res;
}

} // namespace discafem
