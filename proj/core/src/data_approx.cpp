#include "discafem/data_approx.hpp"

#include "discafem/errors.hpp"
#include "discafem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace discafem {

void CoefficientOracle::validate() const
{
    if (!A || !f)
        throw std::invalid_argument("coefficient oracle needs both A and f");
    if (!(r > 0.0) || !(r <= M))
        throw std::invalid_argument("coefficient oracle needs 0 < r <= M");
}

namespace {

struct ComponentFit
{
    double error = 0.0;
    Affine best;
};

void check_fit_args(double q, int degree)
{
    if (!(q >= 2.0))
        throw std::invalid_argument("local fit requires q >= 2");
    if (degree != 0 && degree != 1)
        throw std::invalid_argument("local fit supports degree 0 or 1");
}

int depth_for(const Triangle& T, const FitOptions& opt)
{
    for (const Point& s : opt.singular_points)
        if (T.contains(s, 1e-12))
            return opt.singular_depth;
    return opt.max_depth;
}

// Sample points of the barycentric lattice of level n.
std::vector<Point> lattice(const Triangle& T, int n)
{
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>((n + 1) * (n + 2) / 2));
    for (int i = 0; i <= n; ++i)
        for (int j = 0; i + j <= n; ++j)
            pts.push_back(T.from_barycentric({double(i) / n, double(j) / n, double(n - i - j) / n}));
    return pts;
}

// Fits each of the N components of g on T.
template <std::size_t N, class G>
std::array<ComponentFit, N> fit_components(G& g, const Triangle& T, double q, int degree, const FitOptions& opt)
{
    std::array<ComponentFit, N> out;
    const double area = T.area();

    if (std::isinf(q) && degree == 0) {
        std::array<double, N> lo, hi;
        lo.fill(std::numeric_limits<double>::infinity());
        hi.fill(-std::numeric_limits<double>::infinity());
        for (const Point& x : lattice(T, opt.sup_samples)) {
            const auto v = g(x);
            for (std::size_t k = 0; k < N; ++k) {
                lo[k] = std::min(lo[k], v[k]);
                hi[k] = std::max(hi[k], v[k]);
            }
        }
        for (std::size_t k = 0; k < N; ++k) {
            out[k].best = Affine::constant(0.5 * (lo[k] + hi[k]));
            out[k].error = 0.5 * (hi[k] - lo[k]);
        }
        return out;
    }

    AdaptiveOptions aopt;
    aopt.tol = 0.0;
    aopt.rel_tol = opt.rel_tol;
    aopt.max_depth = depth_for(T, opt);

    // L2 moments of h = g - g(centroid): the shift makes constant data fit exactly.
    const auto g0 = g(T.centroid());
    std::array<Affine, 3> lambda;
    for (int i = 0; i < 3; ++i) {
        std::array<double, 3> e{};
        e[i] = 1.0;
        lambda[i] = Affine::interpolate(T, e);
    }
    auto moments = [&](Point x) {
        const auto v = g(x);
        const double l0 = lambda[0](x), l1 = lambda[1](x), l2 = lambda[2](x);
        std::array<double, 4 * N> m;
        for (std::size_t k = 0; k < N; ++k) {
            const double h = v[k] - g0[k];
            m[4 * k + 0] = h * l0;
            m[4 * k + 1] = h * l1;
            m[4 * k + 2] = h * l2;
            m[4 * k + 3] = h * h;
        }
        return m;
    };
    const auto mom = integrate_adaptive_array<4 * N>(moments, T, aopt).value;

    for (std::size_t k = 0; k < N; ++k) {
        const double b0 = mom[4 * k], b1 = mom[4 * k + 1], b2 = mom[4 * k + 2], hh = mom[4 * k + 3];
        if (degree == 0) {
            const double c = (b0 + b1 + b2) / area;
            out[k].best = Affine::constant(g0[k] + c);
            out[k].error = std::sqrt(std::max(hh - area * c * c, 0.0));
        } else {
            // Inverse of the P1 mass matrix (|T|/12)[[2,1,1],[1,2,1],[1,1,2]].
            const double s = 3.0 / area;
            const double a0 = s * (3.0 * b0 - b1 - b2);
            const double a1 = s * (3.0 * b1 - b0 - b2);
            const double a2 = s * (3.0 * b2 - b0 - b1);
            out[k].best = Affine::interpolate(T, {g0[k] + a0, g0[k] + a1, g0[k] + a2});
            out[k].error = std::sqrt(std::max(hh - (a0 * b0 + a1 * b1 + a2 * b2), 0.0));
        }
    }

    if (q == 2.0 && degree == 0)
        return out;

    if (std::isinf(q)) {
        std::array<double, N> lo, hi;
        lo.fill(std::numeric_limits<double>::infinity());
        hi.fill(-std::numeric_limits<double>::infinity());
        for (const Point& x : lattice(T, opt.sup_samples)) {
            const auto v = g(x);
            for (std::size_t k = 0; k < N; ++k) {
                const double res = v[k] - out[k].best(x);
                lo[k] = std::min(lo[k], res);
                hi[k] = std::max(hi[k], res);
            }
        }
        for (std::size_t k = 0; k < N; ++k) {
            out[k].best = out[k].best + Affine::constant(0.5 * (lo[k] + hi[k]));
            out[k].error = 0.5 * (hi[k] - lo[k]);
        }
        return out;
    }

    // Residual norm measured directly; for q = 2 this avoids cancellation in the moment formula.
    auto residual = [&](Point x) {
        const auto v = g(x);
        std::array<double, N> m;
        for (std::size_t k = 0; k < N; ++k)
            m[k] = std::pow(std::abs(v[k] - out[k].best(x)), q);
        return m;
    };
    const auto res = integrate_adaptive_array<N>(residual, T, aopt).value;
    for (std::size_t k = 0; k < N; ++k)
        out[k].error = std::pow(std::max(res[k], 0.0), 1.0 / q);
    return out;
}

double combine(double q, std::initializer_list<double> errors)
{
    double s = 0.0;
    if (std::isinf(q)) {
        for (double e : errors)
            s = std::max(s, e);
        return s;
    }
    for (double e : errors)
        s += std::pow(e, q);
    return std::pow(s, 1.0 / q);
}

} // namespace

LocalError local_best(const std::function<double(Point)>& g, const Triangle& T, double q, int degree,
                      const FitOptions& options)
{
    check_fit_args(q, degree);
    auto wrapped = [&g](Point x) { return std::array<double, 1>{g(x)}; };
    const auto fit = fit_components<1>(wrapped, T, q, degree, options);
    LocalError e;
    e.value = fit[0].error;
    e.best = fit[0].best;
    return e;
}

LocalMatrixError local_best_matrix(const std::function<SymMat2(Point)>& A, const Triangle& T, double q, int degree,
                                   const FitOptions& options)
{
    check_fit_args(q, degree);
    auto wrapped = [&A](Point x) {
        const SymMat2 m = A(x);
        return std::array<double, 3>{m.xx, m.xy, m.yy};
    };
    const auto fit = fit_components<3>(wrapped, T, q, degree, options);
    LocalMatrixError e;
    e.value = combine(q, {fit[0].error, fit[1].error, fit[2].error});
    e.best = {fit[0].best, fit[1].best, fit[2].best};
    return e;
}

// ---------------------------------------------------------------------------------------

ScalarFitter::ScalarFitter(std::function<double(Point)> g, double q, int degree, FitOptions options)
    : g_(std::move(g)), q_(q), degree_(degree), options_(std::move(options))
{
    check_fit_args(q, degree);
}

const LocalError& ScalarFitter::fit(const MeshForest& forest, NodeId id)
{
    if (cache_.size() <= id)
        cache_.resize(std::max<std::size_t>(id + 1, 2 * cache_.size()));
    auto& slot = cache_[id];
    if (!slot) {
        slot = local_best(g_, forest.triangle(id), q_, degree_, options_);
        slot->element = id;
    }
    return *slot;
}

MatrixFitter::MatrixFitter(std::function<SymMat2(Point)> A, double q, int degree, FitOptions options)
    : A_(std::move(A)), q_(q), degree_(degree), options_(std::move(options))
{
    check_fit_args(q, degree);
}

const LocalMatrixError& MatrixFitter::fit(const MeshForest& forest, NodeId id)
{
    if (cache_.size() <= id)
        cache_.resize(std::max<std::size_t>(id + 1, 2 * cache_.size()));
    auto& slot = cache_[id];
    if (!slot) {
        slot = local_best_matrix(A_, forest.triangle(id), q_, degree_, options_);
        slot->element = id;
    }
    return *slot;
}

OscillationFitter::OscillationFitter(std::function<double(Point)> f, FitOptions options)
    : l2_(std::move(f), 2.0, 0, std::move(options))
{
}

const LocalError& OscillationFitter::fit(const MeshForest& forest, NodeId id)
{
    if (cache_.size() <= id)
        cache_.resize(std::max<std::size_t>(id + 1, 2 * cache_.size()));
    auto& slot = cache_[id];
    if (!slot) {
        LocalError e = l2_.fit(forest, id);
        e.value *= forest.diameter(id);
        slot = e;
    }
    return *slot;
}

// ---------------------------------------------------------------------------------------

GreedyStats greedy_refine(MeshForest& forest, LocalErrorSource& source, double eps, const GreedyOptions& options)
{
    if (!(eps > 0.0))
        throw std::invalid_argument("greedy: tolerance must be positive");
    const double q = options.q;
    const bool sup = std::isinf(q);

    struct Entry
    {
        double e;
        NodeId id;
    };
    auto lower = [&forest](const Entry& a, const Entry& b) {
        if (a.e != b.e)
            return a.e < b.e;
        return forest.lex_less(b.id, a.id);
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(lower)> heap(lower);

    auto power = [q](double e) { return std::pow(e, q); };
    double sum = 0.0;
    for (NodeId id : forest.active_partition()) {
        const double e = source.error(forest, id);
        heap.push({e, id});
        if (!sup)
            sum += power(e);
    }
    auto exact_sum = [&] {
        double s = 0.0;
        for (NodeId id : forest.active_partition())
            s += power(source.error(forest, id));
        return s;
    };
    auto current = [&] {
        if (sup) {
            while (!heap.empty() && !forest.is_active(heap.top().id))
                heap.pop();
            return heap.empty() ? 0.0 : heap.top().e;
        }
        return std::pow(std::max(sum, 0.0), 1.0 / q);
    };

    GreedyStats stats;
    double last_exact = sum;
    for (;;) {
        double err = current();
        if (!sup && (err <= eps || sum < 1e-6 * last_exact)) {
            // The running sum drifts with cancellation; confirm against a fresh sum.
            sum = exact_sum();
            last_exact = sum;
            err = current();
        }
        if (err <= eps) {
            stats.error = err;
            break;
        }
        if (forest.num_active() >= options.max_elements)
            throw ConvergenceError("greedy: element limit reached before the tolerance", err, eps,
                                   forest.num_active());
        while (!forest.is_active(heap.top().id))
            heap.pop();
        const Entry top = heap.top();
        heap.pop();
        const auto [c0, c1] = forest.bisect(top.id, MeshForest::BisectionKind::marked);
        ++stats.marked_count;
        const double e0 = source.error(forest, c0);
        const double e1 = source.error(forest, c1);
        heap.push({e0, c0});
        heap.push({e1, c1});
        if (!sup)
            sum += power(e0) + power(e1) - power(top.e);
        if (options.on_step)
            options.on_step(current());
    }
    stats.closure_count = forest.conforming_closure();
    return stats;
}

namespace {

double global_error(const MeshForest& forest, LocalErrorSource& source, double q)
{
    double s = 0.0;
    for (NodeId id : forest.active_partition()) {
        const double e = source.error(forest, id);
        s = std::isinf(q) ? std::max(s, e) : s + std::pow(e, q);
    }
    return std::isinf(q) ? s : std::pow(s, 1.0 / q);
}

} // namespace

GreedyResult greedy(MeshForest& forest, ScalarFitter& fitter, double eps, const GreedyOptions& options)
{
    GreedyOptions opt = options;
    opt.q = fitter.q();
    const GreedyStats st = greedy_refine(forest, fitter, eps, opt);
    GreedyResult res;
    res.marked_count = st.marked_count;
    res.closure_count = st.closure_count;
    res.approximant.partition = forest.active_partition();
    for (NodeId id : res.approximant.partition)
        res.approximant.poly.push_back(fitter.fit(forest, id).best);
    res.error = global_error(forest, fitter, opt.q);
    return res;
}

std::pair<double, double> vertex_eigen_range(const AffineSym2& B, const Triangle& T)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const Point& p : T.p) {
        const SymMat2 m = B(p);
        lo = std::min(lo, m.lambda_min());
        hi = std::max(hi, m.lambda_max());
    }
    return {lo, hi};
}

RepairResult repair_positivity(const AffineSym2& B, const Triangle& T, double r, double M)
{
    if (!(r > 0.0))
        throw std::invalid_argument("repair_positivity: r must be positive");
    constexpr double C = 4.0;
    const auto [mu, M0] = vertex_eigen_range(B, T);
    const RepairResult scaled_identity{AffineSym2::constant(SymMat2::identity(r)), 2};
    if (M0 > C * M)
        return scaled_identity;
    if (mu >= 0.5 * r)
        return {B, 1};
    const double shift = 0.75 * r - mu;
    if (M0 + shift > C * M + 0.75 * r)
        return scaled_identity;
    AffineSym2 out = B;
    out.xx.c0 += shift;
    out.yy.c0 += shift;
    return {out, 3};
}

CoeffResult coeff(MeshForest& forest, MatrixFitter& fitter, const CoefficientOracle& oracle, double eps,
                  const GreedyOptions& options)
{
    oracle.validate();
    GreedyOptions opt = options;
    opt.q = fitter.q();
    const GreedyStats st = greedy_refine(forest, fitter, eps, opt);

    CoeffResult res;
    res.marked_count = st.marked_count;
    res.closure_count = st.closure_count;
    res.error = global_error(forest, fitter, opt.q);
    PwPolyMatrix& A = res.Ahat;
    A.partition = forest.active_partition();
    A.poly.reserve(A.partition.size());

    const bool plain_mean = fitter.degree() == 0 && !std::isinf(fitter.q());
    if (plain_mean) {
        for (NodeId id : A.partition)
            A.poly.push_back(fitter.fit(forest, id).best);
        A.r_hat = oracle.r;
        A.M_hat = oracle.M;
    } else {
        A.r_hat = std::numeric_limits<double>::infinity();
        A.M_hat = 0.0;
        for (NodeId id : A.partition) {
            const Triangle T = forest.triangle(id);
            const RepairResult rep = repair_positivity(fitter.fit(forest, id).best, T, oracle.r, oracle.M);
            if (rep.branch != 1)
                ++res.repaired;
            const auto [lo, hi] = vertex_eigen_range(rep.B, T);
            A.r_hat = std::min(A.r_hat, lo);
            A.M_hat = std::max(A.M_hat, hi);
            A.poly.push_back(rep.B);
        }
    }
    A.certified = true;
    return res;
}

RhsResult rhs(MeshForest& forest, OscillationFitter& fitter, double eps, const GreedyOptions& options)
{
    GreedyOptions opt = options;
    opt.q = 2.0;
    const GreedyStats st = greedy_refine(forest, fitter, eps, opt);
    RhsResult res;
    res.marked_count = st.marked_count;
    res.closure_count = st.closure_count;
    res.fhat.partition = forest.active_partition();
    for (NodeId id : res.fhat.partition)
        res.fhat.poly.push_back(fitter.fit(forest, id).best);
    res.osc = global_error(forest, fitter, 2.0);
    return res;
}

// ---------------------------------------------------------------------------------------

double meyers_eta(double P, double p)
{
    return (0.5 - 1.0 / p) / (0.5 - 1.0 / P);
}

double MeyersRange::C(double p) const
{
    if (!(p >= 2.0) || !(p < p_star))
        throw std::domain_error("Meyers constant requested outside [2, p*)");
    const double k = std::pow(params.K, meyers_eta(params.P, p));
    const double denom = 1.0 - k * (1.0 - params.r / params.M);
    if (!(denom > 0.0))
        throw std::domain_error("Meyers constant: perturbation series does not converge");
    return k / (params.M * denom);
}

MeyersRange meyers_range(const MeyersParams& params, double t)
{
    if (!(params.P > 2.0) || !(params.K >= 1.0))
        throw std::invalid_argument("meyers_range: need P > 2 and K >= 1");
    if (!(t > 0.0) || !(t < 1.0))
        throw std::invalid_argument("meyers_range: t must lie in (0, 1)");
    MeyersRange out;
    out.params = params;
    out.eta_star = params.K == 1.0 ? 1.0 : std::min(1.0, std::log(1.0 / (1.0 - t)) / std::log(params.K));
    out.p_star = 1.0 / (0.5 - out.eta_star * (0.5 - 1.0 / params.P));
    return out;
}

// ---------------------------------------------------------------------------------------

void write_approximant(std::ostream& os, const PwPolyScalar& f)
{
    os.precision(17);
    for (std::size_t i = 0; i < f.partition.size(); ++i) {
        const Affine& a = f.poly[i];
        os << f.partition[i] << ' ' << a.c0 << ' ' << a.cx << ' ' << a.cy << '\n';
    }
}

void write_approximant(std::ostream& os, const PwPolyMatrix& A)
{
    os.precision(17);
    os << "# " << A.r_hat << ' ' << A.M_hat << '\n';
    for (std::size_t i = 0; i < A.partition.size(); ++i) {
        os << A.partition[i];
        for (const Affine* a : {&A.poly[i].xx, &A.poly[i].xy, &A.poly[i].yy})
            os << ' ' << a->c0 << ' ' << a->cx << ' ' << a->cy;
        os << '\n';
    }
}

} // namespace discafem
