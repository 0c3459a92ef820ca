#pragma once

#include "discafem/afem.hpp"
#include "discafem/data_approx.hpp"
#include "discafem/fem.hpp"
#include "discafem/mesh.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace discafem {

struct DiscConfig
{
    double eps0 = 2.0;
    double omega = 0.8;
    double beta = 0.7;
    double q = 2.0;
    int degree_A = 0;
    PdeConfig pde;
    std::size_t max_outer_iterations = 50;
    /// The loop stops after the first iteration whose final partition has this many dofs.
    std::size_t max_dofs = 200'000;
    /// Elements allowed in RHS and COEFF before they report non-convergence.
    std::size_t max_elements = 2'000'000;
    FitOptions fit;
    ErrorOptions error;
    bool record_time = true;

    /// Throws std::invalid_argument for parameters outside their ranges.
    void validate() const;
};

/// Exact solution data used for error reporting and boundary values.
struct DiscProblem
{
    CoefficientOracle oracle;
    std::function<double(Point)> dirichlet;           // zero trace when empty
    std::function<Point(Point)> exact_gradient;       // optional
};

struct DiscRow
{
    std::size_t k = 0;
    double eps = 0.0;
    std::size_t dofs_rhs = 0;
    std::size_t dofs_coeff = 0;
    std::size_t dofs_pde = 0;
    std::size_t n_f = 0;
    std::size_t n_A = 0;
    std::size_t n_u = 0;
    double eta = 0.0;
    double energy_error = 0.0; // NaN without an exact solution
    double seconds = 0.0;

    // diagnostics
    double osc = 0.0;
    double coeff_error = 0.0;
    double r_hat = 0.0;
    double M_hat = 0.0;
    std::size_t inner_iterations = 0;
    std::size_t elements = 0;
    double closure_ratio = 0.0;
    double galerkin_residual = 0.0;
    std::size_t cg_iterations = 0;
    std::size_t repaired = 0;
    std::size_t closure_f = 0;
    std::size_t closure_A = 0;
    std::size_t closure_u = 0;
};

struct DiscFailure
{
    std::size_t k = 0;
    std::string stage; // "rhs", "coeff" or "pde"
    std::string message;
    double reached = 0.0;
    double target = 0.0;
};

struct DiscTrace
{
    std::vector<DiscRow> rows;
    std::optional<DiscFailure> failure;
    std::size_t initial_elements = 0;
};

/// Outer loop: RHS at omega eps_k, COEFF at omega eps_k, PDE at eps_k / 2, eps_{k+1} = beta eps_k.
///
/// All three stages refine `forest`. Subroutine failures end the loop and are recorded in
/// the trace together with the iteration index.
DiscTrace disc(MeshForest& forest, const DiscProblem& problem, const DiscConfig& config,
               const std::function<void(const DiscRow&)>& on_row = {});

/// Header `k,eps_k,dofs_rhs,dofs_coeff,dofs_pde,Nf,NA,Nu,eta,energy_error,seconds` and one row per iteration.
void write_trace_csv(std::ostream& os, const DiscTrace& trace);
/// Extra per-iteration quantities: oscillation, coefficient error, bounds, inner counts.
void write_diagnostics_csv(std::ostream& os, const DiscTrace& trace);

struct PerturbationResult
{
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    std::size_t fine_elements = 0;
};

/// Compares Galerkin solutions with the exact coefficient and with Ahat on a common mesh.
///
/// The mesh refines Ahat's partition `fine_levels` times uniformly; the exact coefficient
/// enters through its elementwise means there. Both solves share the load (elementwise
/// means of f) and boundary data. lhs = ||grad(u - uhat)||; rhs = rhat^-1 ||grad u||_{Lp(S)}
/// ||A - Ahat||_{Lq(S)} with q = 2p/(p-2) and S the elements where A differs from Ahat.
PerturbationResult perturbation_check(const MeshForest& forest, const CoefficientOracle& oracle,
                                      const PwPolyMatrix& Ahat, int fine_levels, double p,
                                      const std::function<double(Point)>& dirichlet, double cg_rel_tol = 1e-10,
                                      const FitOptions& fit = {});

struct ScalingResult
{
    double deviation = 0.0;  // max |U2 - (1 + delta/s) U1|
    double u1_norm = 0.0;    // max |U1|
};

/// Solves with A and with A / (1 + delta/s) under zero boundary data on the forest's
/// active partition and measures how far the second solution is from the scaled first.
ScalingResult scaling_identity_check(const MeshForest& forest, const PwPolyMatrix& A, const PwPolyScalar& f,
                                     double delta, double s, double cg_rel_tol = 1e-10);

} // namespace discafem
