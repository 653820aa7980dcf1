#pragma once

#include "fetidg/assembly.hpp"
#include "fetidg/problem.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

/// Independent verification path: monolithic assembly on the product space and
/// dense FETI-DP algebra for small configurations. Shares geometry, coefficient
/// sampling and dof bookkeeping with the solver but none of its integration or
/// elimination code.
namespace fetidg::oracle {

struct MonolithicOptions {
    bool consistency = true;     ///< include the s_i terms (a_h); false gives d_h
    bool outer_boundary = true;  ///< include outer-side terms
};

struct MonolithicSystem {
    SparseMatrix matrix;
    Eigen::VectorXd load;
    std::vector<int> offset;  ///< first global index of each subdomain's native block (+ total)

    int index(int sub, int node) const { return offset[static_cast<std::size_t>(sub)] + node; }
    int size() const { return offset.back(); }
};

MonolithicSystem assemble_monolithic(const Geometry& geometry, const CoefficientData& coeffs, double delta,
                                     const SourceFunction& f, MonolithicOptions options = {});

/// Scatter-adds every local A'_i with ghost rows/columns folded onto their partner natives.
SparseMatrix fold_local_systems(const Discretization& problem);

struct DirectSolution {
    Eigen::VectorXd u;
    double relative_residual = 0.0;
};

/// Sparse Cholesky solve; throws SolverError if the matrix is not positive definite.
DirectSolution direct_solve(const MonolithicSystem& system);

/// Splits a monolithic vector into per-subdomain native blocks.
std::vector<Eigen::VectorXd> split_native(const MonolithicSystem& system, const Eigen::VectorXd& u);

/// Dense FETI-DP operators formed explicitly from the block definitions.
struct DenseFeti {
    Eigen::MatrixXd A_tilde;      ///< ordering: I (all subdomains), Pi (global), Delta (all subdomains)
    Eigen::MatrixXd S_tilde;
    Eigen::MatrixXd S_prime_delta;
    Eigen::MatrixXd B;
    Eigen::MatrixXd B_D;
    Eigen::MatrixXd F;
    Eigen::MatrixXd M_inv;
    Eigen::MatrixXd P;            ///< B_D^T B
    Eigen::VectorXd g_dual;
    Eigen::VectorXd d;
    int num_interior = 0;
    int num_primal = 0;
    int num_dual = 0;
};

inline constexpr int kDefaultMultiplierGuard = 2000;
inline constexpr int kDefaultMonolithicGuard = 3000;

/// Throws SolverError when the multiplier count exceeds `guard`.
DenseFeti build_dense_feti(const Discretization& problem, int guard = kDefaultMultiplierGuard);

struct Spectrum {
    std::vector<double> eigenvalues;  ///< ascending
    double theta_min = 0.0;
    double theta_max = 0.0;
    double cond = 1.0;
};

/// Eigenvalues of M^{-1} F from the dense operators.
Spectrum dense_spectrum(const DenseFeti& dense);
Spectrum dense_spectrum(const Discretization& problem, int guard = kDefaultMultiplierGuard);

struct EquivalenceBounds {
    double gamma0 = 0.0;
    double gamma1 = 0.0;
};

/// Extreme generalized eigenvalues of a_h u = lambda d_h u on the monolithic product space.
EquivalenceBounds generalized_eig_check(const Geometry& geometry, const CoefficientData& coeffs, double delta,
                                        int guard = kDefaultMonolithicGuard, bool zero_consistency = false);

/// CSV with header "index,value".
void write_eigenvalues_csv(std::ostream& out, const std::vector<double>& values);

} // namespace fetidg::oracle
