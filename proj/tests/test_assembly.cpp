#include "fetidg/assembly.hpp"
#include "fetidg/error.hpp"
#include "fetidg/oracle.hpp"
#include "fetidg/problem.hpp"

#include <doctest.h>

#include <Eigen/SparseCholesky>

#include <random>

using namespace fetidg;

namespace {

struct Setup {
    Geometry geometry;
    CoefficientData coeffs;
    DofLayout layout;
};

Setup setup(int nx, std::vector<int> n, const CoefficientField& field = CoefficientField(1.0))
{
    Setup s{build_geometry(nx, nx, n), {}, {}};
    s.coeffs = sample_coefficients(s.geometry, field);
    s.layout = build_dof_layout(s.geometry, s.coeffs.layers);
    return s;
}

/// Local vector holding g at native nodes and at the ghost copies' true positions.
template <class G>
Eigen::VectorXd sample_local(const Setup& s, int sub, G g)
{
    const auto& space = s.layout.spaces[static_cast<std::size_t>(sub)];
    Eigen::VectorXd u(space.num_dofs);
    for (int k = 0; k < space.num_dofs; ++k) {
        const auto& o = space.origin[static_cast<std::size_t>(k)];
        const Point p = s.geometry.meshes[static_cast<std::size_t>(o.owner)].vertices[static_cast<std::size_t>(o.node)];
        u[k] = g(p.x, p.y);
    }
    return u;
}

double form(const SparseMatrix& A, const Eigen::VectorXd& u, const Eigen::VectorXd& v) { return u.dot(A * v); }

} // namespace

TEST_CASE("element stiffness of the reference right triangle")
{
    const double h = 0.125;
    const auto K = element_stiffness({0, 0}, {h, 0}, {0, h}, 1.0);
    Eigen::Matrix3d expected;
    expected << 1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5;
    CHECK((K - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((element_stiffness({0, 0}, {h, 0}, {0, h}, 7.5) - 7.5 * expected).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((K * Eigen::Vector3d::Ones()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("volume stiffness annihilates constants and scales linearly")
{
    const auto p = build_partition(2, 2);
    const auto m = triangulate_subdomain(p.subdomains[3], 8);
    std::vector<double> alpha(m.num_triangles());
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(1.0, 1e3);
    for (auto& a : alpha)
        a = u(rng);
    const int dofs = static_cast<int>(m.num_vertices()) + 5;
    const auto A = assemble_volume(m, alpha, dofs);
    CHECK(A.rows() == dofs);
    CHECK(asymmetry(A) == 0.0);
    Eigen::VectorXd ones = Eigen::VectorXd::Zero(dofs);
    ones.head(static_cast<Eigen::Index>(m.num_vertices())).setOnes();
    CHECK((A * ones).cwiseAbs().maxCoeff() < 1e-10 * max_abs(A));
    // Ghost rows stay empty.
    CHECK((A.toDense().bottomRows(5)).cwiseAbs().maxCoeff() == 0.0);

    for (auto& a : alpha)
        a *= 3.0;
    const auto A3 = assemble_volume(m, alpha, dofs);
    CHECK((A3 - 3.0 * A).cwiseAbs().sum() < 1e-10 * max_abs(A3));
}

TEST_CASE("outer consistency terms by hand")
{
    // One subdomain, n = 2, h = 1/2: node 0 = (0,0), 1 = (h,0), 4 = (h,h).
    const auto s = setup(1, {2});
    const auto& space = s.layout.spaces[0];
    const auto S = assemble_consistency(0, s.geometry, s.coeffs, space).toDense();
    // -2 * int_bottom d(phi_1)/dn phi_1 = -2 * (1/h) * (h/2)
    CHECK(S(1, 1) == doctest::Approx(-1.0));
    // Bottom and left sides each give -(-1/h) * h/2.
    CHECK(S(4, 0) == doctest::Approx(1.0));
    CHECK(S(0, 4) == doctest::Approx(1.0));
}

TEST_CASE("consistency vanishes on continuous traces")
{
    const auto s = setup(3, {4, 6, 4, 6, 4, 6, 4, 6, 4});
    const int centre = 4;
    const auto& space = s.layout.spaces[centre];
    const auto S = assemble_consistency(centre, s.geometry, s.coeffs, space);
    CHECK(asymmetry(S) < 1e-12 * max_abs(S));

    // Constants have zero normal derivative and zero jump: S u = 0.
    const auto c = sample_local(s, centre, [](double, double) { return 2.5; });
    CHECK((S * c).cwiseAbs().maxCoeff() < 1e-11 * max_abs(S));

    // A linear function is continuous across the interface, so s(u, u) = 0.
    const auto lin = sample_local(s, centre, [](double x, double y) { return 3 * x - 2 * y + 1; });
    CHECK(std::abs(form(S, lin, lin)) < 1e-11 * max_abs(S));
}

TEST_CASE("penalty integrates the jump exactly")
{
    const auto s = setup(2, {8});
    const int sub = 0;  // bottom-left: right and top interfaces, bottom and left outer sides
    const auto& space = s.layout.spaces[sub];
    const double delta = 5.0, h = 0.5 / 8, H = 0.5;
    const auto P = assemble_penalty(sub, s.geometry, s.coeffs, space, delta);
    CHECK(asymmetry(P) < 1e-14 * max_abs(P));

    Eigen::VectorXd u = Eigen::VectorXd::Ones(space.num_dofs);
    const int right = s.geometry.topology.side_interface[sub][static_cast<int>(Side::Right)];
    const auto& block = space.ghost_block(right);
    u.segment(block.offset, block.size()).setZero();
    // Right interface: (1/2)(delta/h) * H. Outer sides: (delta/h) * 2H.
    CHECK(form(P, u, u) == doctest::Approx(delta / h * H * (0.5 + 2.0)));

    const auto P2 = assemble_penalty(sub, s.geometry, s.coeffs, space, 2 * delta);
    CHECK((P2 - 2.0 * P).cwiseAbs().sum() < 1e-10 * max_abs(P2));

    CHECK_THROWS_AS(assemble_penalty(sub, s.geometry, s.coeffs, space, 0.0), ConfigError);
    CHECK_THROWS_AS(assemble_penalty(sub, s.geometry, s.coeffs, space, -1.0), ConfigError);
}

TEST_CASE("penalty on nonmatching grids")
{
    const auto s = setup(2, {4, 6, 6, 4});
    const int sub = 0;
    const auto& space = s.layout.spaces[sub];
    const auto P = assemble_penalty(sub, s.geometry, s.coeffs, space, 5.0);
    // The same linear function sampled on both grids has zero jump; only outer sides contribute.
    const auto lin = sample_local(s, sub, [](double x, double y) { return 1 + x + y; });
    const auto ghosts_only = [&](Eigen::VectorXd v) {
        v.head(space.num_native).setZero();
        return v;
    };
    const auto g = ghosts_only(lin);
    CHECK(std::abs(form(P, g, g)) > 0.0);
    const double h = 0.5 / 4;
    // Outer sides x = 0 and y = 0 with u = 1 + y and u = 1 + x on [0, H]: each gives int (1+t)^2 = 19/24.
    CHECK(form(P, lin, lin) == doctest::Approx(5.0 / h * 2 * 19.0 / 24.0).epsilon(1e-12));
}

TEST_CASE("local system pieces")
{
    const auto field = CoefficientField(1.0, {{{0.1, 0.1, 0.4, 0.3}, 1e3}});
    const auto s = setup(2, {4, 8, 8, 4}, field);
    for (int sub = 0; sub < 4; ++sub) {
        const auto& space = s.layout.spaces[static_cast<std::size_t>(sub)];
        const auto L = assemble_local(sub, s.geometry, s.coeffs, space, 5.0, unit_source);
        const double scale = max_abs(L.A_prime);
        CHECK((L.A_prime - (L.energy + L.consistency + L.penalty)).cwiseAbs().sum() <= 1e-12 * scale);
        CHECK((L.D - (L.energy + L.penalty)).cwiseAbs().sum() <= 1e-12 * scale);
        CHECK(asymmetry(L.A_prime) <= 1e-12 * scale);
        CHECK(asymmetry(L.D) <= 1e-12 * scale);
        CHECK(L.num_dofs() == space.num_dofs);
    }
}

TEST_CASE("load vector")
{
    const auto p = build_partition(2, 2);
    const auto m = triangulate_subdomain(p.subdomains[1], 4);
    const int dofs = static_cast<int>(m.num_vertices()) + 3;
    const auto ones = assemble_load(m, unit_source, dofs);
    CHECK(ones.sum() == doctest::Approx(p.H * p.H));
    CHECK(ones.tail(3).cwiseAbs().maxCoeff() == 0.0);
    // A corner node with a single triangle gets T/3.
    const double T = m.h * m.h / 2;
    CHECK(ones[m.vertex(4, 0)] == doctest::Approx(T / 3));
    CHECK(ones[m.vertex(0, 0)] == doctest::Approx(2 * T / 3));
    CHECK(assemble_load(m, [](double, double) { return 0.0; }, dofs).cwiseAbs().maxCoeff() == 0.0);
    // Exact for linear f: int_{Omega_1} x dx = H^2 * (x0 + H/2).
    const auto lin = assemble_load(m, [](double x, double) { return x; }, dofs);
    CHECK(lin.sum() == doctest::Approx(p.H * p.H * (0.5 + p.H / 2)));
}

TEST_CASE("monolithic forms")
{
    const auto s = setup(2, {4, 6, 6, 4});
    SUBCASE("constants span the kernel without outer terms")
    {
        for (bool consistency : {true, false}) {
            const auto mono = oracle::assemble_monolithic(s.geometry, s.coeffs, 5.0, unit_source,
                                                          {consistency, false});
            const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mono.size());
            CHECK((mono.matrix * ones).cwiseAbs().maxCoeff() < 1e-10 * max_abs(mono.matrix));
        }
    }
    SUBCASE("positive definite with outer terms")
    {
        const auto mono = oracle::assemble_monolithic(s.geometry, s.coeffs, 5.0, unit_source);
        Eigen::SimplicialLLT<SparseMatrix> llt(mono.matrix);
        CHECK(llt.info() == Eigen::Success);
    }
}

TEST_CASE("energy of a continuous function vanishing on the boundary")
{
    // Matching grids: the interpolant has no jumps and is zero on the outer boundary,
    // so a_h(u, u) reduces to the volume energy.
    const auto s = setup(2, {8});
    const auto mono = oracle::assemble_monolithic(s.geometry, s.coeffs, 5.0, unit_source);
    Eigen::VectorXd u(mono.size());
    double volume = 0.0;
    for (int sub = 0; sub < 4; ++sub) {
        const auto& m = s.geometry.meshes[static_cast<std::size_t>(sub)];
        Eigen::VectorXd ui(static_cast<Eigen::Index>(m.num_vertices()));
        for (std::size_t v = 0; v < m.num_vertices(); ++v) {
            const Point p = m.vertices[v];
            ui[static_cast<Eigen::Index>(v)] = p.x * (1 - p.x) * p.y * (1 - p.y);
            u[mono.index(sub, static_cast<int>(v))] = ui[static_cast<Eigen::Index>(v)];
        }
        const auto A = assemble_volume(m, s.coeffs.triangle_alpha[static_cast<std::size_t>(sub)],
                                       static_cast<int>(m.num_vertices()));
        volume += form(A, ui, ui);
    }
    CHECK(form(mono.matrix, u, u) == doctest::Approx(volume).epsilon(1e-12));
}
