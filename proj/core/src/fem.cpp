#include "discafem/fem.hpp"

#include "discafem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace discafem {

P1Space::P1Space(const MeshForest& forest) : forest_(&forest), elements_(forest.active_partition())
{
    if (!forest.is_conforming())
        throw NonConformingError("P1Space requires a conforming partition");

    vertex_dof_.assign(forest.num_vertices(), kNone);
    for (NodeId id : elements_)
        for (VertexId v : forest.node(id).v)
            vertex_dof_[v] = 0;
    for (VertexId v = 0; v < vertex_dof_.size(); ++v) {
        if (vertex_dof_[v] == kNone)
            continue;
        const auto dof = static_cast<std::uint32_t>(dof_vertex_.size());
        vertex_dof_[v] = dof;
        dof_vertex_.push_back(v);
        const bool b = forest.vertex(v).on_boundary;
        boundary_.push_back(b ? 1 : 0);
        (b ? boundary_dofs_ : interior_dofs_).push_back(dof);
    }
    element_dofs_.reserve(elements_.size());
    for (NodeId id : elements_) {
        const auto& v = forest.node(id).v;
        element_dofs_.push_back({vertex_dof_[v[0]], vertex_dof_[v[1]], vertex_dof_[v[2]]});
    }
}

std::vector<double> P1Space::interpolate(const std::function<double(Point)>& g) const
{
    std::vector<double> u(num_dofs());
    for (std::uint32_t d = 0; d < num_dofs(); ++d)
        u[d] = g(dof_point(d));
    return u;
}

Point P1Space::gradient(std::size_t e, const std::vector<double>& U) const
{
    const auto grads = forest_->triangle(elements_[e]).barycentric_gradients();
    const auto& d = element_dofs_[e];
    return U[d[0]] * grads[0] + U[d[1]] * grads[1] + U[d[2]] * grads[2];
}

// ---------------------------------------------------------------------------------------

void CsrMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const
{
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            s += val[k] * x[col[k]];
        y[i] = s;
    }
}

double CsrMatrix::entry(std::size_t i, std::size_t j) const
{
    const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
    const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
    const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(j));
    return (it != last && *it == j) ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
}

std::vector<double> CsrMatrix::diagonal() const
{
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = entry(i, i);
    return d;
}

CsrMatrix CsrMatrix::from_dense(const std::vector<std::vector<double>>& dense)
{
    CsrMatrix m;
    m.n = dense.size();
    m.row_ptr.push_back(0);
    for (std::size_t i = 0; i < m.n; ++i) {
        for (std::size_t j = 0; j < dense[i].size(); ++j) {
            if (dense[i][j] != 0.0 || i == j) {
                m.col.push_back(static_cast<std::uint32_t>(j));
                m.val.push_back(dense[i][j]);
            }
        }
        m.row_ptr.push_back(m.col.size());
    }
    return m;
}

namespace {

CsrMatrix sparsity_pattern(const P1Space& space)
{
    const std::size_t n = space.num_dofs();
    std::vector<std::vector<std::uint32_t>> rows(n);
    for (std::size_t i = 0; i < n; ++i)
        rows[i].push_back(static_cast<std::uint32_t>(i));
    for (std::size_t e = 0; e < space.num_elements(); ++e) {
        const auto& d = space.element_dofs(e);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (a != b)
                    rows[d[a]].push_back(d[b]);
    }
    CsrMatrix m;
    m.n = n;
    m.row_ptr.reserve(n + 1);
    m.row_ptr.push_back(0);
    for (auto& r : rows) {
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        m.col.insert(m.col.end(), r.begin(), r.end());
        m.row_ptr.push_back(m.col.size());
    }
    m.val.assign(m.col.size(), 0.0);
    return m;
}

std::size_t slot_of(const CsrMatrix& m, std::size_t i, std::uint32_t j)
{
    const auto first = m.col.begin() + static_cast<std::ptrdiff_t>(m.row_ptr[i]);
    const auto last = m.col.begin() + static_cast<std::ptrdiff_t>(m.row_ptr[i + 1]);
    return static_cast<std::size_t>(std::lower_bound(first, last, j) - m.col.begin());
}

double norm2(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

} // namespace

LinearSystem assemble(const P1Space& space, const PwPolyMatrix& Ahat, const PwPolyScalar& fhat)
{
    if (!Ahat.certified)
        throw std::invalid_argument("assemble: coefficient approximation is not certified positive definite");
    const MeshForest& forest = space.forest();
    const auto A = restrict_to(forest, Ahat.partition, Ahat.poly, space.elements());
    const auto f = restrict_to(forest, fhat.partition, fhat.poly, space.elements());

    LinearSystem sys;
    sys.K = sparsity_pattern(space);
    sys.b.assign(space.num_dofs(), 0.0);
    for (std::size_t e = 0; e < space.num_elements(); ++e) {
        const Triangle t = forest.triangle(space.elements()[e]);
        const double area = t.area();
        const auto g = t.barycentric_gradients();
        // The integrand is affine in x, so its mean is its value at the centroid.
        const SymMat2 Abar = A[e](t.centroid());
        const auto& d = space.element_dofs(e);
        for (int a = 0; a < 3; ++a) {
            const Point Ag = Abar.apply(g[a]);
            for (int b = 0; b < 3; ++b)
                sys.K.val[slot_of(sys.K, d[b], d[a])] += area * dot(Ag, g[b]);
        }
        const std::array<double, 3> fv{f[e](t.p[0]), f[e](t.p[1]), f[e](t.p[2])};
        const double fsum = fv[0] + fv[1] + fv[2];
        for (int a = 0; a < 3; ++a)
            sys.b[d[a]] += area / 12.0 * (fsum + fv[a]);
    }
    return sys;
}

void apply_dirichlet(LinearSystem& system, const P1Space& space, const std::vector<double>& g_boundary)
{
    CsrMatrix& K = system.K;
    for (std::uint32_t j : space.boundary_dofs()) {
        const double gj = g_boundary[j];
        for (std::size_t k = K.row_ptr[j]; k < K.row_ptr[j + 1]; ++k) {
            const std::uint32_t i = K.col[k];
            if (i == j) {
                K.val[k] = 1.0;
                continue;
            }
            const double kij = K.val[k];
            K.val[k] = 0.0;
            if (space.is_boundary_dof(i))
                continue;
            system.b[i] -= kij * gj;
            K.val[slot_of(K, i, j)] = 0.0;
        }
        system.b[j] = gj;
    }
}

double relative_residual(const LinearSystem& system, const std::vector<double>& x)
{
    std::vector<double> r;
    system.K.multiply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = system.b[i] - r[i];
    const double nb = norm2(system.b);
    const double nr = norm2(r);
    return nb > 0.0 ? nr / nb : nr;
}

CgResult solve_cg(const LinearSystem& system, double rel_tol, const std::vector<double>* x0,
                  std::size_t max_iterations)
{
    const CsrMatrix& K = system.K;
    const std::size_t n = K.n;
    if (max_iterations == 0)
        max_iterations = 10 * n + 100;

    CgResult res;
    res.x = (x0 && x0->size() == n) ? *x0 : std::vector<double>(n, 0.0);
    const double nb = norm2(system.b);
    if (nb == 0.0) {
        res.x.assign(n, 0.0);
        return res;
    }

    std::vector<double> inv_diag = K.diagonal();
    for (double& d : inv_diag) {
        if (!(d > 0.0))
            throw std::invalid_argument("solve_cg: matrix has a non-positive diagonal entry");
        d = 1.0 / d;
    }

    std::vector<double> r, z(n), p(n), q(n);
    K.multiply(res.x, r);
    for (std::size_t i = 0; i < n; ++i)
        r[i] = system.b[i] - r[i];
    double rn = norm2(r);
    for (std::size_t i = 0; i < n; ++i)
        z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);

    std::size_t it = 0;
    while (rn > rel_tol * nb) {
        if (it == max_iterations)
            throw ConvergenceError("solve_cg: iteration limit reached", rn / nb, rel_tol, it);
        K.multiply(p, q);
        const double pq = std::inner_product(p.begin(), p.end(), q.begin(), 0.0);
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        ++it;
        // Refresh the recursive residual now and then to keep it honest.
        if (it % 200 == 0) {
            K.multiply(res.x, r);
            for (std::size_t i = 0; i < n; ++i)
                r[i] = system.b[i] - r[i];
        }
        rn = norm2(r);
        for (std::size_t i = 0; i < n; ++i)
            z[i] = inv_diag[i] * r[i];
        const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i)
            p[i] = z[i] + beta * p[i];
    }
    res.iterations = it;
    res.rel_residual = relative_residual(system, res.x);
    return res;
}

// ---------------------------------------------------------------------------------------

EstimatorReport estimate(const P1Space& space, const std::vector<double>& U, const PwPolyMatrix& Ahat,
                         const PwPolyScalar& fhat)
{
    const MeshForest& forest = space.forest();
    const Partition& elems = space.elements();
    const auto A = restrict_to(forest, Ahat.partition, Ahat.poly, elems);
    const auto f = restrict_to(forest, fhat.partition, fhat.poly, elems);
    const std::size_t ne = elems.size();

    std::vector<Point> grad(ne);
    std::vector<double> interior(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        grad[e] = space.gradient(e, U);
        const Triangle t = forest.triangle(elems[e]);
        const double div = A[e].divergence_times(grad[e]);
        const Affine res = f[e] + Affine::constant(div);
        // The residual is affine, so the degree-2 rule is exact for its square.
        const double l2sq = integrate([&](Point x) { return res(x) * res(x); }, t, edge_midpoint_rule());
        interior[e] = t.diameter() * std::sqrt(std::max(l2sq, 0.0));
    }

    std::vector<std::uint32_t> slot(forest.num_nodes(), kNone);
    for (std::size_t e = 0; e < ne; ++e)
        slot[elems[e]] = static_cast<std::uint32_t>(e);
    std::vector<double> jump(ne, 0.0);
    for (const InteriorEdge& edge : forest.interior_edges()) {
        const Point pa = forest.vertex(edge.a).p;
        const Point pb = forest.vertex(edge.b).p;
        const Point t = pb - pa;
        const double len = norm(t);
        const Point n{t.y / len, -t.x / len};
        const std::uint32_t l = slot[edge.left];
        const std::uint32_t r = slot[edge.right];
        const double ja = dot(A[l](pa).apply(grad[l]) - A[r](pa).apply(grad[r]), n);
        const double jb = dot(A[l](pb).apply(grad[l]) - A[r](pb).apply(grad[r]), n);
        const double c = len * len / 3.0 * (ja * ja + ja * jb + jb * jb);
        jump[l] += c;
        jump[r] += c;
    }

    EstimatorReport rep;
    rep.elements = elems;
    rep.eta.resize(ne);
    double sum = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
        rep.eta[e] = interior[e] + std::sqrt(jump[e]);
        sum += rep.eta[e] * rep.eta[e];
    }
    rep.total = std::sqrt(sum);
    return rep;
}

double h1_seminorm_error(const P1Space& space, const std::vector<double>& U,
                         const std::function<Point(Point)>& grad_exact, const ErrorOptions& options)
{
    const MeshForest& forest = space.forest();
    double sum = 0.0;
    for (std::size_t e = 0; e < space.num_elements(); ++e) {
        const Triangle t = forest.triangle(space.elements()[e]);
        const Point G = space.gradient(e, U);
        auto integrand = [&](Point x) {
            const Point d = grad_exact(x) - G;
            return dot(d, d);
        };
        bool singular = false;
        for (const Point& s : options.singular_points)
            singular = singular || t.contains(s, 1e-12);
        AdaptiveOptions opt;
        opt.max_depth = singular ? options.singular_depth : options.regular_depth;
        opt.tol = 0.0;
        opt.rel_tol = options.rel_tol;
        sum += integrate_adaptive(integrand, t, opt).value;
    }
    return std::sqrt(std::max(sum, 0.0));
}

void write_solution(std::ostream& os, const P1Space& space, const std::vector<double>& U, const std::string& mesh_ref)
{
    os << "# mesh " << mesh_ref << '\n';
    os.precision(17);
    for (std::size_t d = 0; d < space.num_dofs(); ++d)
        os << d << ' ' << U[d] << '\n';
}

void write_estimator(std::ostream& os, const EstimatorReport& report, const std::string& mesh_ref)
{
    os << "# mesh " << mesh_ref << '\n';
    os.precision(17);
    for (std::size_t e = 0; e < report.size(); ++e)
        os << e << ' ' << report.eta[e] << '\n';
}

} // namespace discafem
