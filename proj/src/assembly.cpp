#include "fetidg/assembly.hpp"

#include "fetidg/error.hpp"

#include <array>
#include <cmath>
#include <string>

namespace fetidg {
namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct Term {
    int dof;
    double coef;
};

Point outward_normal(Side side)
{
    switch (side) {
    case Side::Bottom: return {0.0, -1.0};
    case Side::Right: return {1.0, 0.0};
    case Side::Top: return {0.0, 1.0};
    case Side::Left: return {-1.0, 0.0};
    }
    return {};
}

std::array<Point, 3> gradients(Point a, Point b, Point c, double* area)
{
    const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    *area = 0.5 * det;
    return {Point{(b.y - c.y) / det, (c.x - b.x) / det}, Point{(c.y - a.y) / det, (a.x - c.x) / det},
            Point{(a.y - b.y) / det, (b.x - a.x) / det}};
}

/// One side of subdomain `sub` cut into integration segments.
struct SideSegment {
    double t0 = 0.0;
    double t1 = 0.0;
    double alpha = 1.0;
    int triangle = 0;
    int own_interval = 0;
    int other_interval = -1;  ///< -1 on the outer boundary
};

struct SideData {
    Side side = Side::Bottom;
    double weight = 1.0;   ///< 1 / l
    double h = 0.0;        ///< mesh size entering the penalty
    double own_h = 0.0;
    double other_h = 0.0;
    const std::vector<int>* own_nodes = nullptr;
    int ghost_offset = -1;
    std::vector<SideSegment> segments;
};

std::vector<SideData> collect_sides(int sub, const Geometry& geometry, const CoefficientData& coeffs,
                                    const LocalSpace& space)
{
    const auto& mesh = geometry.meshes[static_cast<std::size_t>(sub)];
    const auto& alpha = coeffs.triangle_alpha[static_cast<std::size_t>(sub)];
    std::vector<SideData> sides;

    for (Side side : kAllSides) {
        SideData d;
        d.side = side;
        d.own_h = mesh.h;
        d.own_nodes = &mesh.boundary_nodes[static_cast<int>(side)];
        const int id = geometry.topology.side_interface[static_cast<std::size_t>(sub)][static_cast<int>(side)];
        if (id < 0) {
            d.weight = 1.0;
            d.h = mesh.h;
            for (int k = 0; k < mesh.n; ++k) {
                SideSegment s;
                s.t0 = k * mesh.h;
                s.t1 = (k + 1) * mesh.h;
                s.triangle = mesh.boundary_triangle(side, k);
                s.alpha = alpha[static_cast<std::size_t>(s.triangle)];
                s.own_interval = k;
                d.segments.push_back(s);
            }
        } else {
            const auto& e = geometry.iface(id);
            const auto& merged = geometry.merged[static_cast<std::size_t>(id)];
            const auto& ic = coeffs.interfaces[static_cast<std::size_t>(id)];
            const bool first = e.is_first(sub);
            d.weight = 0.5;
            d.h = ic.h;
            d.other_h = e.length / e.n_of(e.other(sub));
            d.ghost_offset = space.ghost_block(id).offset;
            for (std::size_t k = 0; k < merged.segments.size(); ++k) {
                const auto& m = merged.segments[k];
                SideSegment s;
                s.t0 = m.t0;
                s.t1 = m.t1;
                s.alpha = ic.alpha[k];
                s.triangle = first ? m.first_triangle : m.second_triangle;
                s.own_interval = first ? m.first_interval : m.second_interval;
                s.other_interval = first ? m.second_interval : m.first_interval;
                d.segments.push_back(s);
            }
        }
        sides.push_back(std::move(d));
    }
    return sides;
}

/// Coefficients of (u_other - u_own)(t) at edge parameter t.
std::vector<Term> jump_terms(const SideData& d, const SideSegment& s, double t)
{
    std::vector<Term> out;
    out.reserve(4);
    const double so = t / d.own_h - s.own_interval;
    const auto& own = *d.own_nodes;
    out.push_back({own[static_cast<std::size_t>(s.own_interval)], -(1.0 - so)});
    out.push_back({own[static_cast<std::size_t>(s.own_interval) + 1], -so});
    if (s.other_interval >= 0) {
        const double sg = t / d.other_h - s.other_interval;
        out.push_back({d.ghost_offset + s.other_interval, 1.0 - sg});
        out.push_back({d.ghost_offset + s.other_interval + 1, sg});
    }
    return out;
}

/// Coefficients of the outward normal derivative of u_own on triangle t.
std::array<Term, 3> normal_derivative_terms(const SubdomainMesh& mesh, int t, Side side)
{
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    double area = 0.0;
    const auto g = gradients(mesh.vertices[static_cast<std::size_t>(tri[0])], mesh.vertices[static_cast<std::size_t>(tri[1])],
                             mesh.vertices[static_cast<std::size_t>(tri[2])], &area);
    const Point n = outward_normal(side);
    std::array<Term, 3> out{};
    for (int a = 0; a < 3; ++a)
        out[static_cast<std::size_t>(a)] = {tri[static_cast<std::size_t>(a)],
                                            g[static_cast<std::size_t>(a)].x * n.x + g[static_cast<std::size_t>(a)].y * n.y};
    return out;
}

SparseMatrix from_triplets(int n, const Triplets& t)
{
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    m.prune(0.0);
    return m;
}

} // namespace

Eigen::Matrix3d element_stiffness(Point a, Point b, Point c, double alpha)
{
    double area = 0.0;
    const auto g = gradients(a, b, c, &area);
    Eigen::Matrix3d k;
    for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s)
            k(r, s) = alpha * area *
                      (g[static_cast<std::size_t>(r)].x * g[static_cast<std::size_t>(s)].x +
                       g[static_cast<std::size_t>(r)].y * g[static_cast<std::size_t>(s)].y);
    return k;
}

SparseMatrix assemble_volume(const SubdomainMesh& mesh, const std::vector<double>& triangle_alpha, int num_dofs)
{
    Triplets t;
    t.reserve(9 * mesh.num_triangles());
    for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
        const auto& tri = mesh.triangles[e];
        const auto k = element_stiffness(mesh.vertices[static_cast<std::size_t>(tri[0])],
                                         mesh.vertices[static_cast<std::size_t>(tri[1])],
                                         mesh.vertices[static_cast<std::size_t>(tri[2])], triangle_alpha[e]);
        for (int r = 0; r < 3; ++r)
            for (int s = 0; s < 3; ++s)
                t.emplace_back(tri[static_cast<std::size_t>(r)], tri[static_cast<std::size_t>(s)], k(r, s));
    }
    return from_triplets(num_dofs, t);
}

SparseMatrix assemble_consistency(int sub, const Geometry& geometry, const CoefficientData& coeffs,
                                  const LocalSpace& space)
{
    const auto& mesh = geometry.meshes[static_cast<std::size_t>(sub)];
    Triplets t;
    for (const auto& side : collect_sides(sub, geometry, coeffs, space)) {
        for (const auto& s : side.segments) {
            // The normal derivative is constant on the segment and the jump is
            // linear, so the midpoint rule is exact.
            const double len = s.t1 - s.t0;
            const auto dn = normal_derivative_terms(mesh, s.triangle, side.side);
            const auto jump = jump_terms(side, s, 0.5 * (s.t0 + s.t1));
            const double w = side.weight * s.alpha * len;
            for (const auto& g : dn) {
                for (const auto& j : jump) {
                    const double v = w * g.coef * j.coef;
                    t.emplace_back(g.dof, j.dof, v);
                    t.emplace_back(j.dof, g.dof, v);
                }
            }
        }
    }
    return from_triplets(space.num_dofs, t);
}

SparseMatrix assemble_penalty(int sub, const Geometry& geometry, const CoefficientData& coeffs,
                              const LocalSpace& space, double delta)
{
    if (!(delta > 0.0))
        throw ConfigError("penalty parameter must be positive, got " + std::to_string(delta));

    // Two-point Gauss rule integrates the product of two linear traces exactly.
    const double gp = 0.5 / std::sqrt(3.0);
    Triplets t;
    for (const auto& side : collect_sides(sub, geometry, coeffs, space)) {
        for (const auto& s : side.segments) {
            const double len = s.t1 - s.t0;
            const double mid = 0.5 * (s.t0 + s.t1);
            const double w = side.weight * delta / side.h * s.alpha * 0.5 * len;
            for (double q : {mid - gp * len, mid + gp * len}) {
                const auto jump = jump_terms(side, s, q);
                for (const auto& a : jump)
                    for (const auto& b : jump)
                        t.emplace_back(a.dof, b.dof, w * a.coef * b.coef);
            }
        }
    }
    return from_triplets(space.num_dofs, t);
}

Eigen::VectorXd assemble_load(const SubdomainMesh& mesh, const SourceFunction& f, int num_dofs)
{
    Eigen::VectorXd load = Eigen::VectorXd::Zero(num_dofs);
    for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
        const double third = mesh.signed_area(static_cast<int>(e)) / 3.0;
        for (int v : mesh.triangles[e]) {
            const Point& p = mesh.vertices[static_cast<std::size_t>(v)];
            load[v] += third * f(p.x, p.y);
        }
    }
    return load;
}

LocalSystem assemble_local(int sub, const Geometry& geometry, const CoefficientData& coeffs,
                           const LocalSpace& space, double delta, const SourceFunction& f)
{
    const auto& mesh = geometry.meshes[static_cast<std::size_t>(sub)];
    LocalSystem sys;
    sys.energy = assemble_volume(mesh, coeffs.triangle_alpha[static_cast<std::size_t>(sub)], space.num_dofs);
    sys.consistency = assemble_consistency(sub, geometry, coeffs, space);
    sys.penalty = assemble_penalty(sub, geometry, coeffs, space, delta);
    sys.D = sys.energy + sys.penalty;
    sys.A_prime = sys.D + sys.consistency;
    sys.load = assemble_load(mesh, f, space.num_dofs);
    return sys;
}

double max_abs(const SparseMatrix& m)
{
    double r = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it)
            r = std::max(r, std::abs(it.value()));
    return r;
}

double asymmetry(const SparseMatrix& m)
{
    const SparseMatrix t = m.transpose();
    return max_abs(SparseMatrix(m - t));
}

} // namespace fetidg
