#include "fetidg/fetidp.hpp"

#include "fetidg/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace fetidg {
namespace {

SparseMatrix extract(const SparseMatrix& A, const std::vector<int>& rows, const std::vector<int>& cols)
{
    std::vector<int> row_pos(static_cast<std::size_t>(A.rows()), -1);
    for (std::size_t k = 0; k < rows.size(); ++k)
        row_pos[static_cast<std::size_t>(rows[k])] = static_cast<int>(k);

    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (SparseMatrix::InnerIterator it(A, cols[c]); it; ++it) {
            const int r = row_pos[static_cast<std::size_t>(it.row())];
            if (r >= 0)
                t.emplace_back(r, static_cast<int>(c), it.value());
        }
    SparseMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

Vector gather(const Vector& v, const std::vector<int>& idx)
{
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k)
        out[static_cast<Eigen::Index>(k)] = v[idx[k]];
    return out;
}

void scatter_add(Vector& v, const std::vector<int>& idx, const Vector& local)
{
    for (std::size_t k = 0; k < idx.size(); ++k)
        v[idx[k]] += local[static_cast<Eigen::Index>(k)];
}

void factor_or_throw(SubdomainOperators::Factor& f, const SparseMatrix& A, int sub, const char* block)
{
    f.compute(A);
    if (f.info() != Eigen::Success)
        throw SolverError("subdomain " + std::to_string(sub) + ": block " + block +
                          " is not positive definite (penalty parameter too small?)");
}

} // namespace

FetiOperators::FetiOperators(const Discretization& problem)
    : jump_(problem.layout.jump), scaling_(problem.layout.scaling), num_primal_(problem.layout.primal.num_global)
{
    const auto& layout = problem.layout;
    const std::size_t N = layout.spaces.size();
    subs_.resize(N);
    coarse_I_ = Eigen::MatrixXd::Zero(num_primal_, num_primal_);
    coarse_R_ = Eigen::MatrixXd::Zero(num_primal_, num_primal_);

    for (std::size_t i = 0; i < N; ++i) {
        const auto& space = layout.spaces[i];
        const auto& A = problem.locals[i].A_prime;
        auto& s = subs_[i];
        s.subdomain = static_cast<int>(i);
        s.interior = space.interior;
        s.primal = space.primal;
        s.dual = space.dual;
        s.primal_global = layout.primal.local_to_global[i];

        native_count_.push_back(space.num_native);
        auto& links = ghost_links_.emplace_back();
        for (int d = space.num_native; d < space.num_dofs; ++d) {
            const auto& o = space.origin[static_cast<std::size_t>(d)];
            links.push_back({d, o.owner, o.node});
        }

        std::vector<int> remaining = s.interior;
        remaining.insert(remaining.end(), s.dual.begin(), s.dual.end());

        s.A_II = extract(A, s.interior, s.interior);
        s.A_IP = extract(A, s.interior, s.primal);
        s.A_ID = extract(A, s.interior, s.dual);
        s.A_DP = extract(A, s.dual, s.primal);
        s.A_DD = extract(A, s.dual, s.dual);
        s.A_RR = extract(A, remaining, remaining);
        s.A_RP = extract(A, remaining, s.primal);
        s.A_PP = Eigen::MatrixXd(extract(A, s.primal, s.primal));

        s.II = std::make_unique<SubdomainOperators::Factor>();
        s.RR = std::make_unique<SubdomainOperators::Factor>();
        factor_or_throw(*s.II, s.A_II, s.subdomain, "A'_II");
        factor_or_throw(*s.RR, s.A_RR, s.subdomain, "A'_RR");

        s.phi_I = s.II->solve(Eigen::MatrixXd(s.A_IP));
        s.phi_R = s.RR->solve(Eigen::MatrixXd(s.A_RP));

        const Eigen::MatrixXd local_I = s.A_PP - Eigen::MatrixXd(s.A_IP.transpose()) * s.phi_I;
        const Eigen::MatrixXd local_R = s.A_PP - Eigen::MatrixXd(s.A_RP.transpose()) * s.phi_R;
        for (std::size_t a = 0; a < s.primal_global.size(); ++a)
            for (std::size_t b = 0; b < s.primal_global.size(); ++b) {
                coarse_I_(s.primal_global[a], s.primal_global[b]) += local_I(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                coarse_R_(s.primal_global[a], s.primal_global[b]) += local_R(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            }
    }

    coarse_I_ = 0.5 * (coarse_I_ + coarse_I_.transpose()).eval();
    coarse_R_ = 0.5 * (coarse_R_ + coarse_R_.transpose()).eval();
    coarse_I_llt_.compute(coarse_I_);
    coarse_R_llt_.compute(coarse_R_);
    if (num_primal_ > 0 && (coarse_I_llt_.info() != Eigen::Success || coarse_R_llt_.info() != Eigen::Success))
        throw SolverError("coarse primal matrix is not positive definite");
}

Vector FetiOperators::dual_block(const Vector& global, std::size_t sub) const
{
    const int off = jump_.dual_offset[sub];
    const int len = jump_.dual_offset[sub + 1] - off;
    return global.segment(off, len);
}

FetiOperators::BlockSolution FetiOperators::solve_interior_primal(const std::vector<Vector>& f_interior,
                                                                  const Vector& f_primal) const
{
    BlockSolution out;
    out.interior.resize(subs_.size());
    Vector g = f_primal;
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        const auto& s = subs_[i];
        out.interior[i] = s.II->solve(f_interior[i]);
        scatter_add(g, s.primal_global, -(s.A_IP.transpose() * out.interior[i]));
    }
    out.primal = num_primal_ > 0 ? Vector(coarse_I_llt_.solve(g)) : Vector();
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        const auto& s = subs_[i];
        if (!s.primal.empty())
            out.interior[i] -= s.phi_I * gather(out.primal, s.primal_global);
    }
    return out;
}

FetiOperators::BlockSolution FetiOperators::solve_tilde(const std::vector<Vector>& f_interior, const Vector& f_primal,
                                                        const std::vector<Vector>& f_dual) const
{
    std::vector<Vector> y(subs_.size());
    Vector g = f_primal;
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        const auto& s = subs_[i];
        const auto nI = static_cast<Eigen::Index>(s.interior.size());
        const auto nD = static_cast<Eigen::Index>(s.dual.size());
        Vector f(nI + nD);
        f.head(nI) = f_interior[i];
        f.tail(nD) = f_dual[i];
        y[i] = s.RR->solve(f);
        scatter_add(g, s.primal_global, -(s.A_RP.transpose() * y[i]));
    }

    BlockSolution out;
    out.primal = num_primal_ > 0 ? Vector(coarse_R_llt_.solve(g)) : Vector();
    out.interior.resize(subs_.size());
    out.dual.resize(subs_.size());
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        const auto& s = subs_[i];
        if (!s.primal.empty())
            y[i] -= s.phi_R * gather(out.primal, s.primal_global);
        const auto nI = static_cast<Eigen::Index>(s.interior.size());
        out.interior[i] = y[i].head(nI);
        out.dual[i] = y[i].tail(static_cast<Eigen::Index>(s.dual.size()));
    }
    return out;
}

Vector FetiOperators::apply_Stilde_inverse(const Vector& r_dual) const
{
    std::vector<Vector> f_interior(subs_.size());
    std::vector<Vector> f_dual(subs_.size());
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        f_interior[i] = Vector::Zero(static_cast<Eigen::Index>(subs_[i].interior.size()));
        f_dual[i] = dual_block(r_dual, i);
    }
    const auto sol = solve_tilde(f_interior, Vector::Zero(num_primal_), f_dual);
    Vector out(num_dual());
    for (std::size_t i = 0; i < subs_.size(); ++i)
        out.segment(jump_.dual_offset[i], static_cast<Eigen::Index>(subs_[i].dual.size())) = sol.dual[i];
    return out;
}

Vector FetiOperators::apply_F(const Vector& lambda) const
{
    return jump_.apply(apply_Stilde_inverse(jump_.apply_transpose(lambda)));
}

Vector FetiOperators::apply_Sprime_delta(const Vector& w_dual) const
{
    Vector out(num_dual());
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        const auto& s = subs_[i];
        const Vector w = dual_block(w_dual, i);
        Vector v = s.A_DD * w;
        if (!s.interior.empty())
            v -= s.A_ID.transpose() * s.II->solve(Vector(s.A_ID * w));
        out.segment(jump_.dual_offset[i], v.size()) = v;
    }
    return out;
}

Vector FetiOperators::apply_preconditioner(const Vector& r) const
{
    return apply_scaled_jump(jump_, scaling_, apply_Sprime_delta(apply_scaled_jump_transpose(jump_, scaling_, r)));
}

DualRhs FetiOperators::compute_rhs(const std::vector<Vector>& loads) const
{
    std::vector<Vector> f_interior(subs_.size());
    Vector f_primal = Vector::Zero(num_primal_);
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        const auto& s = subs_[i];
        f_interior[i] = gather(loads[i], s.interior);
        scatter_add(f_primal, s.primal_global, gather(loads[i], s.primal));
    }
    const auto ip = solve_interior_primal(f_interior, f_primal);

    DualRhs rhs;
    rhs.g_dual.resize(num_dual());
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        const auto& s = subs_[i];
        Vector g = gather(loads[i], s.dual) - s.A_ID.transpose() * ip.interior[i];
        if (!s.primal.empty())
            g -= s.A_DP * gather(ip.primal, s.primal_global);
        rhs.g_dual.segment(jump_.dual_offset[i], g.size()) = g;
    }
    rhs.d = jump_.apply(apply_Stilde_inverse(rhs.g_dual));
    return rhs;
}

RecoveredSolution FetiOperators::recover_solution(const Vector& lambda, const DualRhs& rhs,
                                                  const std::vector<Vector>& loads) const
{
    RecoveredSolution out;
    out.u_dual = apply_Stilde_inverse(rhs.g_dual - jump_.apply_transpose(lambda));

    // Back-substitute (u_I, u_Pi) from the (I, Pi) block with u_Delta known.
    std::vector<Vector> f_interior(subs_.size());
    Vector f_primal = Vector::Zero(num_primal_);
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        const auto& s = subs_[i];
        const Vector u_d = dual_block(out.u_dual, i);
        f_interior[i] = gather(loads[i], s.interior) - s.A_ID * u_d;
        scatter_add(f_primal, s.primal_global, gather(loads[i], s.primal) - s.A_DP.transpose() * u_d);
    }
    const auto ip = solve_interior_primal(f_interior, f_primal);

    out.local.resize(subs_.size());
    out.native.resize(subs_.size());
    double umax = 0.0;
    for (std::size_t i = 0; i < subs_.size(); ++i) {
        const auto& s = subs_[i];
        Vector u = Vector::Zero(loads[i].size());
        const Vector u_d = dual_block(out.u_dual, i);
        for (std::size_t k = 0; k < s.interior.size(); ++k)
            u[s.interior[k]] = ip.interior[i][static_cast<Eigen::Index>(k)];
        for (std::size_t k = 0; k < s.primal.size(); ++k)
            u[s.primal[k]] = ip.primal[s.primal_global[k]];
        for (std::size_t k = 0; k < s.dual.size(); ++k)
            u[s.dual[k]] = u_d[static_cast<Eigen::Index>(k)];
        umax = std::max(umax, u.cwiseAbs().maxCoeff());
        out.local[i] = std::move(u);
    }
    for (std::size_t i = 0; i < subs_.size(); ++i)
        out.native[i] = out.local[i].head(native_count_[i]);

    // Every ghost value must agree with the native value it copies.
    double mismatch = 0.0;
    for (std::size_t i = 0; i < subs_.size(); ++i)
        for (const auto& [dof, owner, node] : ghost_links_[i])
            mismatch = std::max(mismatch, std::abs(out.local[i][dof] - out.local[static_cast<std::size_t>(owner)][node]));
    out.ghost_mismatch = umax > 0.0 ? mismatch / umax : mismatch;
    return out;
}

std::vector<double> lanczos_ritz_values(const std::vector<double>& alphas, const std::vector<double>& betas)
{
    const auto m = static_cast<Eigen::Index>(alphas.size());
    if (m == 0)
        return {};
    Vector diag(m);
    Vector sub(std::max<Eigen::Index>(m - 1, 0));
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        diag[k] = 1.0 / alphas[uk] + (k > 0 ? betas[uk - 1] / alphas[uk - 1] : 0.0);
        if (k + 1 < m)
            sub[k] = std::sqrt(betas[uk]) / alphas[uk];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const Vector& ev = eig.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

SolveReport pcg_solve(const LinearOperator& apply_F, const LinearOperator& apply_preconditioner, const Vector& d,
                      double tol, int max_it)
{
    if (!(tol > 0.0))
        throw ConfigError("tolerance must be positive");
    if (max_it < 1)
        throw ConfigError("max_it must be at least 1");

    SolveReport rep;
    rep.lambda = Vector::Zero(d.size());
    const double d_norm = d.norm();
    rep.residual_history.push_back(d_norm);
    if (d_norm == 0.0) {
        rep.converged = true;
        return rep;
    }

    std::vector<double> alphas;
    std::vector<double> betas;
    Vector r = d;
    Vector z = apply_preconditioner(r);
    Vector p = z;
    double rz = r.dot(z);
    double r_norm = d_norm;

    while (rep.iterations < max_it) {
        const Vector q = apply_F(p);
        const double alpha = rz / p.dot(q);
        rep.lambda += alpha * p;
        r -= alpha * q;
        alphas.push_back(alpha);
        ++rep.iterations;
        r_norm = r.norm();
        rep.residual_history.push_back(r_norm);
        if (r_norm <= tol * d_norm) {
            rep.converged = true;
            break;
        }
        z = apply_preconditioner(r);
        const double rz_next = r.dot(z);
        const double beta = rz_next / rz;
        betas.push_back(beta);
        rz = rz_next;
        p = z + beta * p;
    }

    rep.final_relative_residual = r_norm / d_norm;
    rep.ritz_values = lanczos_ritz_values(alphas, betas);
    if (!rep.ritz_values.empty()) {
        rep.ritz_min = rep.ritz_values.front();
        rep.ritz_max = rep.ritz_values.back();
        rep.cond_estimate = rep.ritz_max / rep.ritz_min;
    }
    return rep;
}

} // namespace fetidg
