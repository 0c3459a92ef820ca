#pragma once

#include "discafem/fem.hpp"
#include "discafem/geometry.hpp"
#include "discafem/mesh.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace discafem {

/// q value selecting the sup norm.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Pointwise access to the data of -div(A grad u) = f with declared spectral bounds.
struct CoefficientOracle
{
    std::function<SymMat2(Point)> A;
    std::function<double(Point)> f;
    double r = 1.0; // lower bound of lambda_min(A)
    double M = 1.0; // upper bound of lambda_max(A)
    /// Points near which integrands need deeper adaptive quadrature.
    std::vector<Point> singular_points;

    /// Throws std::invalid_argument unless 0 < r <= M and both functions are set.
    void validate() const;
};

/// Quadrature and sampling controls for local fits.
struct FitOptions
{
    double rel_tol = 1e-8;
    int max_depth = 6;
    int singular_depth = 12;
    std::vector<Point> singular_points;
    /// Lattice level n for sup-norm estimates: (n+1)(n+2)/2 samples per element.
    int sup_samples = 16;
};

struct LocalError
{
    NodeId element = kNone;
    double value = 0.0;
    Affine best;
};

/// Best local approximation of g on T by polynomials of the given degree (0 or 1).
///
/// q = 2: exact L2 projection and L2 residual. 2 < q < inf: L2 projection with Lq residual.
/// q = inf: degree 0 uses the sampled midrange; degree 1 shifts the L2 projection by the
/// sampled residual midrange. Throws std::invalid_argument for q < 2 or degree outside {0, 1}.
LocalError local_best(const std::function<double(Point)>& g, const Triangle& T, double q, int degree,
                      const FitOptions& options = {});

/// Local fit of a symmetric matrix field: entrywise approximants, error = l_q norm of the
/// three entrywise errors (max for q = inf).
struct LocalMatrixError
{
    NodeId element = kNone;
    double value = 0.0;
    AffineSym2 best;
};

LocalMatrixError local_best_matrix(const std::function<SymMat2(Point)>& A, const Triangle& T, double q, int degree,
                                   const FitOptions& options = {});

/// Source of local errors for the greedy loop. Implementations cache per forest node.
class LocalErrorSource
{
public:
    virtual ~LocalErrorSource() = default;
    virtual double error(const MeshForest& forest, NodeId id) = 0;
};

struct GreedyOptions
{
    double q = 2.0;
    /// Elements allowed before the loop gives up with ConvergenceError.
    std::size_t max_elements = 4'000'000;
    /// Called after every marked bisection with the current global error.
    std::function<void(double)> on_step;
};

struct GreedyStats
{
    std::size_t marked_count = 0;
    std::size_t closure_count = 0;
    /// Global error on the partition before closure.
    double error = 0.0;
};

/// Refines the forest's active partition by bisecting the element with the largest local
/// error (ties: smallest in forest order) until the global error (sum E^q)^(1/q), or max E
/// for q = inf, is at most eps. Then applies the conforming closure.
GreedyStats greedy_refine(MeshForest& forest, LocalErrorSource& source, double eps, const GreedyOptions& options);

/// Cached scalar fits of a fixed function.
class ScalarFitter : public LocalErrorSource
{
public:
    ScalarFitter(std::function<double(Point)> g, double q, int degree, FitOptions options = {});

    const LocalError& fit(const MeshForest& forest, NodeId id);
    double error(const MeshForest& forest, NodeId id) override { return fit(forest, id).value; }

    double q() const { return q_; }
    int degree() const { return degree_; }

private:
    std::function<double(Point)> g_;
    double q_;
    int degree_;
    FitOptions options_;
    std::vector<std::optional<LocalError>> cache_;
};

/// Cached matrix fits of a fixed coefficient.
class MatrixFitter : public LocalErrorSource
{
public:
    MatrixFitter(std::function<SymMat2(Point)> A, double q, int degree, FitOptions options = {});

    const LocalMatrixError& fit(const MeshForest& forest, NodeId id);
    double error(const MeshForest& forest, NodeId id) override { return fit(forest, id).value; }

    double q() const { return q_; }
    int degree() const { return degree_; }

private:
    std::function<SymMat2(Point)> A_;
    double q_;
    int degree_;
    FitOptions options_;
    std::vector<std::optional<LocalMatrixError>> cache_;
};

/// Oscillation indicator diam(T) ||f - mean_T f||_{L2(T)} with the elementwise mean.
class OscillationFitter : public LocalErrorSource
{
public:
    explicit OscillationFitter(std::function<double(Point)> f, FitOptions options = {});

    /// Indicator value and elementwise mean.
    const LocalError& fit(const MeshForest& forest, NodeId id);
    double error(const MeshForest& forest, NodeId id) override { return fit(forest, id).value; }

private:
    ScalarFitter l2_;
    std::vector<std::optional<LocalError>> cache_;
};

struct GreedyResult
{
    PwPolyScalar approximant;
    std::size_t marked_count = 0;
    std::size_t closure_count = 0;
    /// Global error on the returned (closed) partition.
    double error = 0.0;
};

/// Greedy approximation of g followed by closure; the approximant lives on the closed partition.
GreedyResult greedy(MeshForest& forest, ScalarFitter& fitter, double eps, const GreedyOptions& options = {});

struct RepairResult
{
    AffineSym2 B;
    /// 1: kept, 2: replaced by r I, 3: shifted.
    int branch = 1;
};

/// Makes an affine symmetric matrix field on T uniformly positive definite.
///
/// Branches are tried in this order: if the largest vertex eigenvalue exceeds 4M, or a shift
/// would push it above 4M + 3r/4, return r I; if the smallest vertex eigenvalue mu is at
/// least r/2, keep B; otherwise return B + (3r/4 - mu) I. Eigenvalue extrema of affine
/// fields over T sit at vertices.
RepairResult repair_positivity(const AffineSym2& B, const Triangle& T, double r, double M);

/// Smallest and largest vertex eigenvalues of an affine symmetric field on T.
std::pair<double, double> vertex_eigen_range(const AffineSym2& B, const Triangle& T);

struct CoeffResult
{
    PwPolyMatrix Ahat;
    std::size_t marked_count = 0;
    std::size_t closure_count = 0;
    double error = 0.0;
    std::size_t repaired = 0;
};

/// Greedy approximation of A at tolerance eps followed by closure and positivity repair.
///
/// Elementwise means (q < inf, degree 0) carry the oracle bounds (r, M). Every other
/// approximant is repaired and certified with its actual vertex eigenvalue range.
CoeffResult coeff(MeshForest& forest, MatrixFitter& fitter, const CoefficientOracle& oracle, double eps,
                  const GreedyOptions& options = {});

struct RhsResult
{
    PwPolyScalar fhat;
    std::size_t marked_count = 0;
    std::size_t closure_count = 0;
    double osc = 0.0;
};

/// Greedy reduction of the oscillation of f below eps; fhat is the elementwise mean.
RhsResult rhs(MeshForest& forest, OscillationFitter& fitter, double eps, const GreedyOptions& options = {});

struct MeyersParams
{
    double P = 4.0; // integrability limit of the domain, > 2
    double K = 1.0; // norm constant, >= 1
    double r = 1.0;
    double M = 1.0;
};

/// (1/2 - 1/p) / (1/2 - 1/P).
double meyers_eta(double P, double p);

struct MeyersRange
{
    MeyersParams params;
    double eta_star = 1.0;
    double p_star = 2.0;

    /// (1/M) K^eta(p) / (1 - K^eta(p) (1 - r/M)); throws std::domain_error outside [2, p_star).
    double C(double p) const;
};

/// Range of exponents reachable by perturbation off the Laplacian for contrast parameter t.
MeyersRange meyers_range(const MeyersParams& params, double t);

/// Writes `element c0 cx cy` per element in partition order.
void write_approximant(std::ostream& os, const PwPolyScalar& f);
/// Writes `element xx.c0 xx.cx xx.cy xy.c0 ... yy.cy` per element, after an `# r M` line.
void write_approximant(std::ostream& os, const PwPolyMatrix& A);

} // namespace discafem
