#include "fetidg/dofspace.hpp"

#include "fetidg/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>

namespace fetidg {

const GhostBlock& LocalSpace::ghost_block(int iface) const
{
    for (const auto& g : ghosts)
        if (g.iface == iface)
            return g;
    throw SolverError("subdomain " + std::to_string(subdomain) + " has no ghost block for interface " +
                      std::to_string(iface));
}

LocalSpace build_local_space(int sub, const Geometry& geometry)
{
    const auto& mesh = geometry.meshes[static_cast<std::size_t>(sub)];
    const auto& topo = geometry.topology;

    LocalSpace s;
    s.subdomain = sub;
    s.num_native = static_cast<int>(mesh.num_vertices());

    s.origin.resize(static_cast<std::size_t>(s.num_native));
    for (int v = 0; v < s.num_native; ++v)
        s.origin[static_cast<std::size_t>(v)] = {sub, v, -1};

    std::vector<bool> on_gamma(static_cast<std::size_t>(s.num_native), false);
    std::vector<bool> corner(static_cast<std::size_t>(s.num_native), false);

    int next = s.num_native;
    for (int id : topo.interior_of(sub)) {
        const auto& e = topo.interfaces[static_cast<std::size_t>(id)];
        const auto& own = e.nodes_of(sub);
        for (std::size_t k = 0; k < own.size(); ++k) {
            const auto v = static_cast<std::size_t>(own[k]);
            on_gamma[v] = true;
            if (k == 0 || k + 1 == own.size())
                corner[v] = true;
            else
                s.origin[v].iface = id;
        }

        GhostBlock g;
        g.iface = id;
        g.neighbor = e.other(sub);
        g.offset = next;
        g.neighbor_nodes = e.nodes_of(g.neighbor);
        for (int k = 0; k < g.size(); ++k) {
            const bool endpoint = k == 0 || k + 1 == g.size();
            s.origin.push_back({g.neighbor, g.neighbor_nodes[static_cast<std::size_t>(k)], endpoint ? -1 : id});
        }
        next += g.size();
        s.ghosts.push_back(std::move(g));
    }
    s.num_dofs = next;

    s.cls.resize(static_cast<std::size_t>(s.num_dofs));
    for (int d = 0; d < s.num_dofs; ++d) {
        DofClass c;
        if (d < s.num_native) {
            const auto v = static_cast<std::size_t>(d);
            c = !on_gamma[v] ? DofClass::Interior : (corner[v] ? DofClass::Primal : DofClass::Dual);
        } else {
            c = s.origin[static_cast<std::size_t>(d)].iface < 0 ? DofClass::Primal : DofClass::Dual;
        }
        s.cls[static_cast<std::size_t>(d)] = c;
        switch (c) {
        case DofClass::Interior: s.interior.push_back(d); break;
        case DofClass::Primal: s.primal.push_back(d); break;
        case DofClass::Dual: s.dual.push_back(d); break;
        }
        if (c != DofClass::Interior)
            s.gamma.push_back(d);
    }
    return s;
}

GlobalPrimalMap classify_primal_dual(std::span<const LocalSpace> spaces, const Geometry& geometry)
{
    // Key: (y, x, owner, node) so ids follow the geometric corner order.
    using Key = std::tuple<double, double, int, int>;
    std::map<Key, int> ids;
    auto key_of = [&](const DofOrigin& o) {
        const auto& p = geometry.meshes[static_cast<std::size_t>(o.owner)].vertices[static_cast<std::size_t>(o.node)];
        return Key{p.y, p.x, o.owner, o.node};
    };
    for (const auto& s : spaces)
        for (int d : s.primal)
            ids.emplace(key_of(s.origin[static_cast<std::size_t>(d)]), 0);

    GlobalPrimalMap map;
    for (auto& [key, id] : ids) {
        id = map.num_global++;
        map.global_origin.push_back({std::get<2>(key), std::get<3>(key), -1});
    }
    map.local_to_global.reserve(spaces.size());
    for (const auto& s : spaces) {
        std::vector<int> l2g;
        l2g.reserve(s.primal.size());
        for (int d : s.primal)
            l2g.push_back(ids.at(key_of(s.origin[static_cast<std::size_t>(d)])));
        map.local_to_global.push_back(std::move(l2g));
    }
    return map;
}

Eigen::VectorXd JumpMatrix::apply(const Eigen::VectorXd& u_dual) const
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        out[static_cast<Eigen::Index>(r)] = u_dual[rows[r].plus] - u_dual[rows[r].minus];
    return out;
}

Eigen::VectorXd JumpMatrix::apply_transpose(const Eigen::VectorXd& lambda) const
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(num_dual);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double l = lambda[static_cast<Eigen::Index>(r)];
        out[rows[r].plus] += l;
        out[rows[r].minus] -= l;
    }
    return out;
}

Eigen::SparseMatrix<double> JumpMatrix::to_sparse() const
{
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(2 * rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        t.emplace_back(static_cast<int>(r), rows[r].plus, 1.0);
        t.emplace_back(static_cast<int>(r), rows[r].minus, -1.0);
    }
    Eigen::SparseMatrix<double> B(static_cast<Eigen::Index>(rows.size()), num_dual);
    B.setFromTriplets(t.begin(), t.end());
    return B;
}

JumpMatrix build_jump_matrix(std::span<const LocalSpace> spaces, const Geometry& geometry)
{
    JumpMatrix jump;
    // local dof -> global dual index, per subdomain
    std::vector<std::vector<int>> dual_index(spaces.size());
    jump.dual_offset.push_back(0);
    for (std::size_t i = 0; i < spaces.size(); ++i) {
        const auto& s = spaces[i];
        dual_index[i].assign(static_cast<std::size_t>(s.num_dofs), -1);
        for (std::size_t k = 0; k < s.dual.size(); ++k)
            dual_index[i][static_cast<std::size_t>(s.dual[k])] = jump.num_dual + static_cast<int>(k);
        jump.num_dual += static_cast<int>(s.dual.size());
        jump.dual_offset.push_back(jump.num_dual);
    }

    std::vector<int> uses(static_cast<std::size_t>(jump.num_dual), 0);
    auto dual_of = [&](int sub, int dof) {
        const int g = dual_index[static_cast<std::size_t>(sub)][static_cast<std::size_t>(dof)];
        if (g < 0)
            throw SolverError("subdomain " + std::to_string(sub) + ": dof " + std::to_string(dof) +
                              " is not a dual dof");
        ++uses[static_cast<std::size_t>(g)];
        return g;
    };

    auto emit_family = [&](const EdgeInterface& e, int owner) {
        const int neighbor = e.other(owner);
        const auto& own_nodes = e.nodes_of(owner);
        const auto& ghost = spaces[static_cast<std::size_t>(neighbor)].ghost_block(e.id);
        if (ghost.neighbor_nodes != own_nodes)
            throw SolverError("interface " + std::to_string(e.id) + ": ghost copy in subdomain " +
                              std::to_string(neighbor) + " does not match its partner trace");
        for (std::size_t k = 1; k + 1 < own_nodes.size(); ++k)
            jump.rows.push_back({dual_of(owner, own_nodes[k]), dual_of(neighbor, ghost.offset + static_cast<int>(k))});
    };

    for (const auto& e : geometry.topology.interfaces) {
        emit_family(e, e.first);
        emit_family(e, e.second);
    }

    for (std::size_t g = 0; g < uses.size(); ++g)
        if (uses[g] != 1)
            throw SolverError("dual dof " + std::to_string(g) + " appears in " + std::to_string(uses[g]) +
                              " jump rows (expected 1)");
    return jump;
}

ScalingMatrix build_scaling(std::span<const LocalSpace> spaces, const JumpMatrix& jump,
                            std::span<const LayerStats> layers, const Geometry& geometry)
{
    ScalingMatrix sc;
    sc.diag.resize(jump.num_dual);
    for (std::size_t i = 0; i < spaces.size(); ++i) {
        const auto& s = spaces[i];
        const double abar_i = layers[i].alpha_hi;
        for (std::size_t k = 0; k < s.dual.size(); ++k) {
            const int iface = s.origin[static_cast<std::size_t>(s.dual[k])].iface;
            const int j = geometry.iface(iface).other(static_cast<int>(i));
            const double abar_j = layers[static_cast<std::size_t>(j)].alpha_hi;
            sc.diag[jump.dual_offset[i] + static_cast<int>(k)] = abar_j / (abar_j + abar_i);
        }
    }
    return sc;
}

Eigen::VectorXd apply_scaled_jump(const JumpMatrix& jump, const ScalingMatrix& scaling, const Eigen::VectorXd& u_dual)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(jump.rows.size()));
    for (std::size_t r = 0; r < jump.rows.size(); ++r) {
        const auto& row = jump.rows[r];
        out[static_cast<Eigen::Index>(r)] =
            scaling.diag[row.plus] * u_dual[row.plus] - scaling.diag[row.minus] * u_dual[row.minus];
    }
    return out;
}

Eigen::VectorXd apply_scaled_jump_transpose(const JumpMatrix& jump, const ScalingMatrix& scaling,
                                            const Eigen::VectorXd& lambda)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(jump.num_dual);
    for (std::size_t r = 0; r < jump.rows.size(); ++r) {
        const auto& row = jump.rows[r];
        const double l = lambda[static_cast<Eigen::Index>(r)];
        out[row.plus] += scaling.diag[row.plus] * l;
        out[row.minus] -= scaling.diag[row.minus] * l;
    }
    return out;
}

Eigen::VectorXd apply_jump_projection(const JumpMatrix& jump, const ScalingMatrix& scaling,
                                      const Eigen::VectorXd& u_dual)
{
    return apply_scaled_jump_transpose(jump, scaling, jump.apply(u_dual));
}

DofLayout build_dof_layout(const Geometry& geometry, std::span<const LayerStats> layers)
{
    DofLayout layout;
    layout.spaces.reserve(geometry.num_subdomains());
    for (std::size_t i = 0; i < geometry.num_subdomains(); ++i)
        layout.spaces.push_back(build_local_space(static_cast<int>(i), geometry));
    layout.primal = classify_primal_dual(layout.spaces, geometry);
    layout.jump = build_jump_matrix(layout.spaces, geometry);
    layout.scaling = build_scaling(layout.spaces, layout.jump, layers, geometry);
    return layout;
}

} // namespace fetidg
