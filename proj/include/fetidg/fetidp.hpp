#pragma once

#include "fetidg/problem.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <functional>
#include <memory>
#include <vector>

namespace fetidg {

using Vector = Eigen::VectorXd;
using LinearOperator = std::function<Vector(const Vector&)>;

/// Per-subdomain blocks of A'_i in the (I, Pi, Delta) split and their factorizations.
struct SubdomainOperators {
    int subdomain = 0;
    std::vector<int> interior;  ///< local dofs of I
    std::vector<int> primal;    ///< local dofs of Pi
    std::vector<int> dual;      ///< local dofs of Delta
    std::vector<int> primal_global;

    SparseMatrix A_II, A_IP, A_ID, A_DP, A_DD, A_RR, A_RP;
    Eigen::MatrixXd A_PP;

    using Factor = Eigen::SimplicialLLT<SparseMatrix>;
    std::unique_ptr<Factor> II;  ///< A'_II
    std::unique_ptr<Factor> RR;  ///< A'_RR, R = I followed by Delta

    Eigen::MatrixXd phi_I;  ///< A_II^{-1} A_IP
    Eigen::MatrixXd phi_R;  ///< A_RR^{-1} A_RP
};

/// Right-hand side data of the dual problem.
struct DualRhs {
    Vector g_dual;  ///< g~_Delta
    Vector d;       ///< B S~^{-1} g~_Delta
};

/// Solution values per subdomain plus the interface consistency check.
struct RecoveredSolution {
    std::vector<Vector> local;   ///< full local vectors including ghosts
    std::vector<Vector> native;  ///< native values per subdomain
    Vector u_dual;
    double ghost_mismatch = 0.0;  ///< max |ghost - partner native| relative to max |u|
};

/// Implicit FETI-DP operators. Immutable after construction; all apply_* are const
/// and may be called concurrently.
class FetiOperators {
public:
    /// Factors the local blocks and both coarse matrices. Throws SolverError
    /// naming the subdomain when a local block is not positive definite.
    explicit FetiOperators(const Discretization& problem);

    int num_multipliers() const { return static_cast<int>(jump_.num_rows()); }
    int num_dual() const { return jump_.num_dual; }
    int num_primal() const { return num_primal_; }

    const JumpMatrix& jump() const { return jump_; }
    const ScalingMatrix& scaling() const { return scaling_; }
    const SubdomainOperators& subdomain(int i) const { return subs_[static_cast<std::size_t>(i)]; }
    std::size_t num_subdomains() const { return subs_.size(); }

    /// Subassembled Schur complement on Pi after eliminating I.
    const Eigen::MatrixXd& coarse_matrix() const { return coarse_I_; }
    /// Subassembled Schur complement on Pi after eliminating I and Delta.
    const Eigen::MatrixXd& dual_coarse_matrix() const { return coarse_R_; }

    Vector apply_Stilde_inverse(const Vector& r_dual) const;
    Vector apply_F(const Vector& lambda) const;
    Vector apply_Sprime_delta(const Vector& w_dual) const;
    Vector apply_preconditioner(const Vector& r) const;

    DualRhs compute_rhs(const std::vector<Vector>& loads) const;
    RecoveredSolution recover_solution(const Vector& lambda, const DualRhs& rhs, const std::vector<Vector>& loads) const;

private:
    struct BlockSolution {
        std::vector<Vector> interior;
        std::vector<Vector> dual;
        Vector primal;
    };
    BlockSolution solve_interior_primal(const std::vector<Vector>& f_interior, const Vector& f_primal) const;
    BlockSolution solve_tilde(const std::vector<Vector>& f_interior, const Vector& f_primal,
                              const std::vector<Vector>& f_dual) const;
    Vector dual_block(const Vector& global, std::size_t sub) const;

    struct GhostLink {
        int dof;
        int owner;
        int node;
    };

    std::vector<SubdomainOperators> subs_;
    std::vector<Eigen::Index> native_count_;
    std::vector<std::vector<GhostLink>> ghost_links_;
    JumpMatrix jump_;
    ScalingMatrix scaling_;
    int num_primal_ = 0;
    Eigen::MatrixXd coarse_I_;
    Eigen::MatrixXd coarse_R_;
    Eigen::LLT<Eigen::MatrixXd> coarse_I_llt_;
    Eigen::LLT<Eigen::MatrixXd> coarse_R_llt_;
};

struct SolveReport {
    int iterations = 0;
    bool converged = false;
    double cond_estimate = 1.0;
    double ritz_min = 1.0;
    double ritz_max = 1.0;
    double final_relative_residual = 0.0;
    std::vector<double> residual_history;  ///< l2 norm of d - F lambda, starting with the initial residual
    std::vector<double> ritz_values;
    Vector lambda;
};

/// Preconditioned CG from a zero initial guess, stopping once ||d - F lambda|| <= tol ||d||.
/// The condition estimate comes from the Lanczos tridiagonal built from the CG coefficients.
SolveReport pcg_solve(const LinearOperator& apply_F, const LinearOperator& apply_preconditioner, const Vector& d,
                      double tol, int max_it);

/// Extreme eigenvalues of the Lanczos tridiagonal assembled from CG step sizes.
std::vector<double> lanczos_ritz_values(const std::vector<double>& alphas, const std::vector<double>& betas);

} // namespace fetidg
