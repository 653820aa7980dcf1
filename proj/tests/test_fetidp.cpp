#include "support.hpp"

#include "fetidg/error.hpp"
#include "fetidg/fetidp.hpp"
#include "fetidg/oracle.hpp"

#include <doctest.h>

#include <random>

using namespace fetidg;
using namespace fetidg::testing;

namespace {

Vector random_vector(Eigen::Index n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> d;
    Vector v(n);
    for (auto& x : v)
        x = d(rng);
    return v;
}

template <class Op>
Eigen::MatrixXd columns(Op op, Eigen::Index n)
{
    Eigen::MatrixXd M(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
        M.col(c) = op(Vector::Unit(n, c));
    return M;
}

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

} // namespace

TEST_CASE("matrix-free operators agree with the dense ones")
{
    for (const auto& field : {CoefficientField(1.0), interface_islands(2, 1e4), checkerboard(2, 1e3)}) {
        const auto p = make_problem(2, "checker:4,6", field);
        const FetiOperators ops(p);
        const auto dense = oracle::build_dense_feti(p);
        const Eigen::Index nd = ops.num_dual(), m = ops.num_multipliers();
        REQUIRE(dense.num_dual == nd);
        REQUIRE(dense.F.rows() == m);

        const Eigen::MatrixXd S_inv = dense.S_tilde.inverse();
        CHECK(rel(columns([&](const Vector& x) { return ops.apply_Stilde_inverse(x); }, nd), S_inv) < 1e-10);
        CHECK(rel(columns([&](const Vector& x) { return ops.apply_F(x); }, m), dense.F) < 1e-10);
        CHECK(rel(columns([&](const Vector& x) { return ops.apply_preconditioner(x); }, m), dense.M_inv) < 1e-10);
        CHECK(rel(columns([&](const Vector& x) { return ops.apply_Sprime_delta(x); }, nd), dense.S_prime_delta) <
              1e-10);

        const auto rhs = ops.compute_rhs(loads_of(p));
        CHECK(rel(rhs.g_dual, dense.g_dual) < 1e-10);
        CHECK(rel(rhs.d, dense.d) < 1e-10);

        CHECK(ops.apply_F(Vector::Zero(m)).cwiseAbs().maxCoeff() == 0.0);
        CHECK(ops.apply_preconditioner(Vector::Zero(m)).cwiseAbs().maxCoeff() == 0.0);
        CHECK(ops.apply_Stilde_inverse(Vector::Zero(nd)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("coarse matrices")
{
    const auto p1 = make_problem(2, "4", CoefficientField(1.0));
    const auto p7 = make_problem(2, "4", CoefficientField(7.0));
    const FetiOperators o1(p1), o7(p7);
    CHECK(o1.num_primal() == 12);
    const auto& K = o1.coarse_matrix();
    CHECK(K.rows() == 12);
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() < 1e-12 * K.cwiseAbs().maxCoeff());
    CHECK(Eigen::LLT<Eigen::MatrixXd>(K).info() == Eigen::Success);
    CHECK(Eigen::LLT<Eigen::MatrixXd>(o1.dual_coarse_matrix()).info() == Eigen::Success);
    CHECK(rel(o7.coarse_matrix(), 7.0 * K) < 1e-12);
    CHECK(rel(o7.dual_coarse_matrix(), 7.0 * o1.dual_coarse_matrix()) < 1e-12);
}

TEST_CASE("right-hand side scales with the source")
{
    const auto field = interface_islands(2, 1e2);
    const auto p = make_problem(2, "6", field);
    const auto p3 = make_problem(2, "6", field, kDefaultPenalty, [](double, double) { return 3.0; });
    const auto p0 = make_problem(2, "6", field, kDefaultPenalty, [](double, double) { return 0.0; });
    const FetiOperators ops(p);
    const auto d1 = ops.compute_rhs(loads_of(p)).d;
    CHECK(rel(ops.compute_rhs(loads_of(p3)).d, 3.0 * d1) < 1e-12);
    CHECK(ops.compute_rhs(loads_of(p0)).d.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("preconditioned CG edge cases")
{
    const auto identity = [](const Vector& x) { return x; };
    SUBCASE("zero right-hand side")
    {
        const auto r = pcg_solve(identity, identity, Vector::Zero(5), 1e-6, 10);
        CHECK(r.converged);
        CHECK(r.iterations == 0);
        CHECK(r.lambda.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("identity system")
    {
        const auto r = pcg_solve(identity, identity, Vector::Ones(7), 1e-10, 10);
        CHECK(r.converged);
        CHECK(r.iterations == 1);
        CHECK(r.cond_estimate == doctest::Approx(1.0));
    }
    SUBCASE("iteration cap")
    {
        const Vector diag = Vector::LinSpaced(20, 1.0, 100.0);
        const auto F = [&](const Vector& x) -> Vector { return diag.cwiseProduct(x); };
        const auto r = pcg_solve(F, identity, Vector::Ones(20), 1e-12, 2);
        CHECK_FALSE(r.converged);
        CHECK(r.iterations == 2);
        CHECK(r.final_relative_residual > 1e-12);
        const auto full = pcg_solve(F, identity, Vector::Ones(20), 1e-12, 100);
        CHECK(full.converged);
        CHECK(full.cond_estimate == doctest::Approx(100.0).epsilon(1e-8));
    }
    SUBCASE("invalid arguments")
    {
        CHECK_THROWS_AS(pcg_solve(identity, identity, Vector::Ones(3), 0.0, 10), ConfigError);
        CHECK_THROWS_AS(pcg_solve(identity, identity, Vector::Ones(3), 1e-6, 0), ConfigError);
    }
}

TEST_CASE("Lanczos values from CG coefficients")
{
    CHECK(lanczos_ritz_values({0.5}, {}) == std::vector<double>{2.0});
    // A diagonal operator with three distinct eigenvalues is recovered exactly.
    const Vector diag = (Vector(3) << 2.0, 5.0, 11.0).finished();
    const auto F = [&](const Vector& x) -> Vector { return diag.cwiseProduct(x); };
    const auto r = pcg_solve(F, [](const Vector& x) { return x; }, Vector::Ones(3), 1e-14, 10);
    REQUIRE(r.ritz_values.size() >= 2);
    CHECK(r.ritz_min == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.ritz_max == doctest::Approx(11.0).epsilon(1e-10));
}

TEST_CASE("solution recovery")
{
    const auto p = make_problem(2, "checker:4,8", interface_islands(2, 1e3));
    const FetiOperators ops(p);
    const auto run = run_feti(p, ops, 1e-8);
    CHECK(run.report.converged);
    CHECK(run.report.ritz_min >= 1.0 - 1e-8);
    CHECK(run.solution.ghost_mismatch < 1e-6);
    CHECK(oracle_distance(p, run.solution) < 1e-6);
    CHECK(ops.jump().apply(run.solution.u_dual).cwiseAbs().maxCoeff() < 1e-6 * run.solution.u_dual.cwiseAbs().maxCoeff());
    // The last recorded residual meets the tolerance.
    CHECK(run.report.residual_history.back() <= 1e-8 * run.report.residual_history.front());

    const auto p0 = make_problem(2, "checker:4,8", interface_islands(2, 1e3), kDefaultPenalty,
                                 [](double, double) { return 0.0; });
    const FetiOperators ops0(p0);
    const auto zero = run_feti(p0, ops0);
    CHECK(zero.report.iterations == 0);
    for (const auto& u : zero.solution.native)
        CHECK(u.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scaled transpose extension")
{
    // w = B_D^T mu satisfies B w = mu, P w = w, and its S~ energy is bounded by its S'_Delta energy.
    const auto p = make_problem(2, "checker:4,6", checkerboard(2, 1e4));
    const FetiOperators ops(p);
    const auto dense = oracle::build_dense_feti(p);
    for (unsigned seed : {1u, 2u, 3u}) {
        const auto mu = random_vector(ops.num_multipliers(), seed);
        const Vector w = dense.B_D.transpose() * mu;
        CHECK((dense.B * w - mu).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((dense.P * w - w).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(w.dot(dense.S_tilde * w) <= w.dot(ops.apply_Sprime_delta(w)) * (1 + 1e-12));
    }
}

TEST_CASE("S'_Delta is the energy minimum over interior values")
{
    const auto p = make_problem(2, "5", interface_islands(2, 1e2));
    const FetiOperators ops(p);
    const auto& sub = ops.subdomain(3);
    const Eigen::MatrixXd A = p.locals[3].A_prime.toDense();
    const auto nI = static_cast<Eigen::Index>(sub.interior.size());
    const auto nD = static_cast<Eigen::Index>(sub.dual.size());
    const auto block = [&](const std::vector<int>& r, const std::vector<int>& c) {
        Eigen::MatrixXd M(r.size(), c.size());
        for (std::size_t i = 0; i < r.size(); ++i)
            for (std::size_t j = 0; j < c.size(); ++j)
                M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = A(r[i], c[j]);
        return M;
    };
    const Eigen::MatrixXd AII = block(sub.interior, sub.interior), AID = block(sub.interior, sub.dual),
                          ADD = block(sub.dual, sub.dual);

    Vector w_global = Vector::Zero(ops.num_dual());
    const Vector w = random_vector(nD, 9);
    w_global.segment(ops.jump().dual_offset[3], nD) = w;
    const double schur = w_global.dot(ops.apply_Sprime_delta(w_global));

    const auto energy = [&](const Vector& vI) { return vI.dot(AII * vI) + 2 * vI.dot(AID * w) + w.dot(ADD * w); };
    const Vector vI = -AII.llt().solve(AID * w);
    CHECK(energy(vI) == doctest::Approx(schur).epsilon(1e-10));
    for (unsigned seed : {4u, 5u})
        CHECK(energy(vI + 0.1 * random_vector(nI, seed)) > schur);
}

TEST_CASE("single subdomain has no multipliers")
{
    const auto p = make_problem(1, "6", CoefficientField(1.0));
    const FetiOperators ops(p);
    CHECK(ops.num_multipliers() == 0);
    const auto run = run_feti(p, ops);
    CHECK(run.report.iterations == 0);
    CHECK(oracle_distance(p, run.solution) < 1e-12);
}

TEST_CASE("tiny penalty loses positive definiteness")
{
    const auto p = make_problem(2, "4", CoefficientField(1.0), 1e-6);
    CHECK_THROWS_AS(FetiOperators{p}, SolverError);
}
