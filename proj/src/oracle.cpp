#include "fetidg/oracle.hpp"

#include "fetidg/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>

namespace fetidg::oracle {
namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct Entry {
    int index;
    double coef;
};

Point vertex(const SubdomainMesh& m, int v) { return m.vertices[static_cast<std::size_t>(v)]; }

/// Barycentric gradients from the inverse transpose of the affine Jacobian.
std::array<Eigen::Vector2d, 3> barycentric_gradients(const SubdomainMesh& m, int t)
{
    const auto& tri = m.triangles[static_cast<std::size_t>(t)];
    const Point p0 = vertex(m, tri[0]), p1 = vertex(m, tri[1]), p2 = vertex(m, tri[2]);
    Eigen::Matrix2d J;
    J << p1.x - p0.x, p2.x - p0.x, p1.y - p0.y, p2.y - p0.y;
    const Eigen::Matrix2d JinvT = J.inverse().transpose();
    return {JinvT * Eigen::Vector2d(-1.0, -1.0), JinvT * Eigen::Vector2d(1.0, 0.0), JinvT * Eigen::Vector2d(0.0, 1.0)};
}

/// Cotangent-formula P1 stiffness.
Eigen::Matrix3d cotangent_stiffness(Point a, Point b, Point c, double alpha)
{
    const std::array<Point, 3> p = {a, b, c};
    Eigen::Matrix3d k = Eigen::Matrix3d::Zero();
    for (int opp = 0; opp < 3; ++opp) {
        const Point& o = p[static_cast<std::size_t>(opp)];
        const Point& u = p[static_cast<std::size_t>((opp + 1) % 3)];
        const Point& v = p[static_cast<std::size_t>((opp + 2) % 3)];
        const double ux = u.x - o.x, uy = u.y - o.y, vx = v.x - o.x, vy = v.y - o.y;
        const double cot = (ux * vx + uy * vy) / std::abs(ux * vy - uy * vx);
        const int r = (opp + 1) % 3, s = (opp + 2) % 3;
        k(r, s) -= 0.5 * alpha * cot;
        k(s, r) -= 0.5 * alpha * cot;
        k(r, r) += 0.5 * alpha * cot;
        k(s, s) += 0.5 * alpha * cot;
    }
    return k;
}

Eigen::Vector2d normal_of(Side side)
{
    switch (side) {
    case Side::Bottom: return {0.0, -1.0};
    case Side::Right: return {1.0, 0.0};
    case Side::Top: return {0.0, 1.0};
    case Side::Left: return {-1.0, 0.0};
    }
    return {0.0, 0.0};
}

/// Trace of subdomain `sub` on `side` at edge parameter t, as global entries.
std::array<Entry, 2> trace(const MonolithicSystem& sys, const SubdomainMesh& m, Side side, double t)
{
    const int k = std::clamp(static_cast<int>(std::floor(t / m.h)), 0, m.n - 1);
    const double s = t / m.h - k;
    const auto& nodes = m.boundary_nodes[static_cast<int>(side)];
    return {Entry{sys.index(m.subdomain, nodes[static_cast<std::size_t>(k)]), 1.0 - s},
            Entry{sys.index(m.subdomain, nodes[static_cast<std::size_t>(k) + 1]), s}};
}

std::array<Entry, 3> normal_derivative(const MonolithicSystem& sys, const SubdomainMesh& m, int t, Side side)
{
    const auto g = barycentric_gradients(m, t);
    const Eigen::Vector2d n = normal_of(side);
    const auto& tri = m.triangles[static_cast<std::size_t>(t)];
    std::array<Entry, 3> out{};
    for (std::size_t a = 0; a < 3; ++a)
        out[a] = {sys.index(m.subdomain, tri[a]), g[a].dot(n)};
    return out;
}

void add_outer(const std::vector<Entry>& x, const std::vector<Entry>& y, double w, Triplets& t)
{
    for (const auto& a : x)
        for (const auto& b : y)
            t.emplace_back(a.index, b.index, w * a.coef * b.coef);
}

/// Adds w * (x y^T + y x^T).
void add_symmetric(const std::vector<Entry>& x, const std::vector<Entry>& y, double w, Triplets& t)
{
    add_outer(x, y, w, t);
    add_outer(y, x, w, t);
}

} // namespace

MonolithicSystem assemble_monolithic(const Geometry& geometry, const CoefficientData& coeffs, double delta,
                                     const SourceFunction& f, MonolithicOptions options)
{
    if (!(delta > 0.0))
        throw ConfigError("penalty parameter must be positive");

    MonolithicSystem sys;
    sys.offset.push_back(0);
    for (const auto& m : geometry.meshes)
        sys.offset.push_back(sys.offset.back() + static_cast<int>(m.num_vertices()));
    const int n = sys.size();
    sys.load = Eigen::VectorXd::Zero(n);

    Triplets t;
    for (const auto& m : geometry.meshes) {
        const auto& alpha = coeffs.triangle_alpha[static_cast<std::size_t>(m.subdomain)];
        for (std::size_t e = 0; e < m.num_triangles(); ++e) {
            const auto& tri = m.triangles[e];
            const auto k = cotangent_stiffness(vertex(m, tri[0]), vertex(m, tri[1]), vertex(m, tri[2]), alpha[e]);
            const double area = std::abs(m.signed_area(static_cast<int>(e)));
            for (int r = 0; r < 3; ++r) {
                const Point p = vertex(m, tri[static_cast<std::size_t>(r)]);
                sys.load[sys.index(m.subdomain, tri[static_cast<std::size_t>(r)])] += area / 3.0 * f(p.x, p.y);
                for (int s = 0; s < 3; ++s)
                    t.emplace_back(sys.index(m.subdomain, tri[static_cast<std::size_t>(r)]),
                                   sys.index(m.subdomain, tri[static_cast<std::size_t>(s)]), k(r, s));
            }
        }
    }

    // Simpson's rule: exact for the quadratic and linear edge integrands.
    const std::array<double, 3> simpson_w = {1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};

    // Interior interfaces: both one-sided forms (each with l = 2) at once.
    for (const auto& e : geometry.topology.interfaces) {
        const auto& mi = geometry.meshes[static_cast<std::size_t>(e.first)];
        const auto& mj = geometry.meshes[static_cast<std::size_t>(e.second)];
        const auto& ai = coeffs.triangle_alpha[static_cast<std::size_t>(e.first)];
        const auto& aj = coeffs.triangle_alpha[static_cast<std::size_t>(e.second)];
        const double h_ij = 2.0 * mi.h * mj.h / (mi.h + mj.h);
        for (const auto& seg : geometry.merged[static_cast<std::size_t>(e.id)].segments) {
            const double a_i = ai[static_cast<std::size_t>(seg.first_triangle)];
            const double a_j = aj[static_cast<std::size_t>(seg.second_triangle)];
            const double alpha = 2.0 * a_i * a_j / (a_i + a_j);
            const auto dn_i = normal_derivative(sys, mi, seg.first_triangle, e.first_side);
            const auto dn_j = normal_derivative(sys, mj, seg.second_triangle, e.second_side);
            const std::array<double, 3> ts = {seg.t0, 0.5 * (seg.t0 + seg.t1), seg.t1};
            for (std::size_t q = 0; q < 3; ++q) {
                const double w = simpson_w[q] * seg.length;
                const auto ti = trace(sys, mi, e.first_side, ts[q]);
                const auto tj = trace(sys, mj, e.second_side, ts[q]);
                // jump_ij = u_j - u_i
                std::vector<Entry> jump = {tj[0], tj[1], {ti[0].index, -ti[0].coef}, {ti[1].index, -ti[1].coef}};
                add_outer(jump, jump, w * delta / h_ij * alpha, t);
                if (options.consistency) {
                    std::vector<Entry> gi(dn_i.begin(), dn_i.end());
                    std::vector<Entry> gj(dn_j.begin(), dn_j.end());
                    std::vector<Entry> jump_ji = {ti[0], ti[1], {tj[0].index, -tj[0].coef}, {tj[1].index, -tj[1].coef}};
                    add_symmetric(gi, jump, 0.5 * w * alpha, t);
                    add_symmetric(gj, jump_ji, 0.5 * w * alpha, t);
                }
            }
        }
    }

    if (options.outer_boundary) {
        for (const auto& m : geometry.meshes) {
            const auto& alpha = coeffs.triangle_alpha[static_cast<std::size_t>(m.subdomain)];
            for (Side side : geometry.topology.outer_sides_of(m.subdomain)) {
                for (int k = 0; k < m.n; ++k) {
                    const int tri = m.boundary_triangle(side, k);
                    const double a = alpha[static_cast<std::size_t>(tri)];
                    const auto dn = normal_derivative(sys, m, tri, side);
                    std::vector<Entry> g(dn.begin(), dn.end());
                    for (std::size_t q = 0; q < 3; ++q) {
                        const double tq = (k + 0.5 * static_cast<double>(q)) * m.h;
                        const double w = simpson_w[q] * m.h;
                        const auto tr = trace(sys, m, side, tq);
                        std::vector<Entry> minus_u = {{tr[0].index, -tr[0].coef}, {tr[1].index, -tr[1].coef}};
                        add_outer(minus_u, minus_u, w * delta / m.h * a, t);
                        if (options.consistency)
                            add_symmetric(g, minus_u, w * a, t);
                    }
                }
            }
        }
    }

    sys.matrix.resize(n, n);
    sys.matrix.setFromTriplets(t.begin(), t.end());
    sys.matrix.prune(0.0);
    return sys;
}

SparseMatrix fold_local_systems(const Discretization& problem)
{
    std::vector<int> offset{0};
    for (const auto& m : problem.geometry.meshes)
        offset.push_back(offset.back() + static_cast<int>(m.num_vertices()));

    Triplets t;
    for (std::size_t i = 0; i < problem.locals.size(); ++i) {
        const auto& A = problem.locals[i].A_prime;
        const auto& origin = problem.layout.spaces[i].origin;
        auto global = [&](Eigen::Index d) {
            const auto& o = origin[static_cast<std::size_t>(d)];
            return offset[static_cast<std::size_t>(o.owner)] + o.node;
        };
        for (int c = 0; c < A.outerSize(); ++c)
            for (SparseMatrix::InnerIterator it(A, c); it; ++it)
                t.emplace_back(global(it.row()), global(it.col()), it.value());
    }
    SparseMatrix out(offset.back(), offset.back());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

DirectSolution direct_solve(const MonolithicSystem& system)
{
    Eigen::SimplicialLLT<SparseMatrix> llt(system.matrix);
    if (llt.info() != Eigen::Success)
        throw SolverError("monolithic matrix is not positive definite (penalty parameter too small?)");
    DirectSolution s;
    s.u = llt.solve(system.load);
    const double bn = system.load.norm();
    const double rn = (system.load - system.matrix * s.u).norm();
    s.relative_residual = bn > 0.0 ? rn / bn : rn;
    return s;
}

std::vector<Eigen::VectorXd> split_native(const MonolithicSystem& system, const Eigen::VectorXd& u)
{
    std::vector<Eigen::VectorXd> out;
    for (std::size_t i = 0; i + 1 < system.offset.size(); ++i)
        out.push_back(u.segment(system.offset[i], system.offset[i + 1] - system.offset[i]));
    return out;
}

DenseFeti build_dense_feti(const Discretization& problem, int guard)
{
    const auto& layout = problem.layout;
    const auto& jump = layout.jump;
    if (static_cast<int>(jump.num_rows()) > guard)
        throw SolverError("dense FETI-DP: " + std::to_string(jump.num_rows()) + " multipliers exceed the guard of " +
                          std::to_string(guard));

    DenseFeti out;
    std::vector<int> interior_offset{0};
    for (const auto& s : layout.spaces)
        interior_offset.push_back(interior_offset.back() + static_cast<int>(s.interior.size()));
    out.num_interior = interior_offset.back();
    out.num_primal = layout.primal.num_global;
    out.num_dual = jump.num_dual;
    const int nK = out.num_interior + out.num_primal;
    const int n = nK + out.num_dual;

    out.A_tilde = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    out.S_prime_delta = Eigen::MatrixXd::Zero(out.num_dual, out.num_dual);

    for (std::size_t i = 0; i < layout.spaces.size(); ++i) {
        const auto& s = layout.spaces[i];
        const Eigen::MatrixXd A(problem.locals[i].A_prime);
        const auto& load = problem.locals[i].load;

        std::vector<int> map(static_cast<std::size_t>(s.num_dofs));
        for (std::size_t k = 0; k < s.interior.size(); ++k)
            map[static_cast<std::size_t>(s.interior[k])] = interior_offset[i] + static_cast<int>(k);
        for (std::size_t k = 0; k < s.primal.size(); ++k)
            map[static_cast<std::size_t>(s.primal[k])] = out.num_interior + layout.primal.local_to_global[i][k];
        for (std::size_t k = 0; k < s.dual.size(); ++k)
            map[static_cast<std::size_t>(s.dual[k])] = nK + jump.dual_offset[i] + static_cast<int>(k);
        for (int r = 0; r < s.num_dofs; ++r) {
            f[map[static_cast<std::size_t>(r)]] += load[r];
            for (int c = 0; c < s.num_dofs; ++c)
                out.A_tilde(map[static_cast<std::size_t>(r)], map[static_cast<std::size_t>(c)]) += A(r, c);
        }

        // Local Schur complement onto Gamma', then keep the dual rows/columns.
        const auto ni = static_cast<Eigen::Index>(s.interior.size());
        const auto ng = static_cast<Eigen::Index>(s.gamma.size());
        Eigen::MatrixXd AII(ni, ni), AIG(ni, ng), AGG(ng, ng);
        for (Eigen::Index r = 0; r < ni; ++r) {
            for (Eigen::Index c = 0; c < ni; ++c)
                AII(r, c) = A(s.interior[static_cast<std::size_t>(r)], s.interior[static_cast<std::size_t>(c)]);
            for (Eigen::Index c = 0; c < ng; ++c)
                AIG(r, c) = A(s.interior[static_cast<std::size_t>(r)], s.gamma[static_cast<std::size_t>(c)]);
        }
        for (Eigen::Index r = 0; r < ng; ++r)
            for (Eigen::Index c = 0; c < ng; ++c)
                AGG(r, c) = A(s.gamma[static_cast<std::size_t>(r)], s.gamma[static_cast<std::size_t>(c)]);
        const Eigen::MatrixXd S = AGG - AIG.transpose() * AII.ldlt().solve(AIG);

        std::vector<Eigen::Index> keep;
        for (std::size_t k = 0; k < s.gamma.size(); ++k)
            if (s.cls[static_cast<std::size_t>(s.gamma[k])] == DofClass::Dual)
                keep.push_back(static_cast<Eigen::Index>(k));
        const int off = jump.dual_offset[i];
        for (std::size_t r = 0; r < keep.size(); ++r)
            for (std::size_t c = 0; c < keep.size(); ++c)
                out.S_prime_delta(off + static_cast<Eigen::Index>(r), off + static_cast<Eigen::Index>(c)) = S(keep[r], keep[c]);
    }

    const Eigen::MatrixXd K = out.A_tilde.topLeftCorner(nK, nK);
    const Eigen::MatrixXd KD = out.A_tilde.topRightCorner(nK, out.num_dual);
    const Eigen::MatrixXd DD = out.A_tilde.bottomRightCorner(out.num_dual, out.num_dual);
    const Eigen::LLT<Eigen::MatrixXd> K_llt(K);
    if (K_llt.info() != Eigen::Success)
        throw SolverError("dense FETI-DP: (I, Pi) block is not positive definite");
    out.S_tilde = DD - KD.transpose() * K_llt.solve(KD);
    out.g_dual = f.tail(out.num_dual) - KD.transpose() * K_llt.solve(f.head(nK));

    out.B = Eigen::MatrixXd(jump.to_sparse());
    out.B_D = out.B * layout.scaling.diag.asDiagonal();
    const Eigen::LLT<Eigen::MatrixXd> S_llt(out.S_tilde);
    if (S_llt.info() != Eigen::Success)
        throw SolverError("dense FETI-DP: S~ is not positive definite");
    out.F = out.B * S_llt.solve(out.B.transpose());
    out.d = out.B * S_llt.solve(out.g_dual);
    out.M_inv = out.B_D * out.S_prime_delta * out.B_D.transpose();
    out.P = out.B_D.transpose() * out.B;
    return out;
}

Spectrum dense_spectrum(const DenseFeti& dense)
{
    Spectrum sp;
    if (dense.F.rows() == 0)
        return sp;
    const Eigen::MatrixXd Minv = 0.5 * (dense.M_inv + dense.M_inv.transpose());
    const Eigen::LLT<Eigen::MatrixXd> llt(Minv);
    if (llt.info() != Eigen::Success)
        throw SolverError("dense preconditioner is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    const Eigen::MatrixXd C = L.transpose() * dense.F * L;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (C + C.transpose()), Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    sp.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    sp.theta_min = sp.eigenvalues.front();
    sp.theta_max = sp.eigenvalues.back();
    sp.cond = sp.theta_max / sp.theta_min;
    return sp;
}

Spectrum dense_spectrum(const Discretization& problem, int guard)
{
    return dense_spectrum(build_dense_feti(problem, guard));
}

EquivalenceBounds generalized_eig_check(const Geometry& geometry, const CoefficientData& coeffs, double delta,
                                        int guard, bool zero_consistency)
{
    const auto one = [](double, double) { return 1.0; };
    const auto a = assemble_monolithic(geometry, coeffs, delta, one, {.consistency = !zero_consistency});
    const auto d = assemble_monolithic(geometry, coeffs, delta, one, {.consistency = false});
    if (a.size() > guard)
        throw SolverError("generalized eigenvalue check: dimension " + std::to_string(a.size()) +
                          " exceeds the guard of " + std::to_string(guard));
    const Eigen::MatrixXd A(a.matrix);
    const Eigen::MatrixXd D(d.matrix);
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, D, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw SolverError("generalized eigenvalue check: d_h is not positive definite");
    return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

void write_eigenvalues_csv(std::ostream& out, const std::vector<double>& values)
{
    out << "index,value\n";
    out.precision(17);
    for (std::size_t k = 0; k < values.size(); ++k)
        out << k << ',' << values[k] << '\n';
}

} // namespace fetidg::oracle
