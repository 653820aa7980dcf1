#pragma once

#include "fetidg/coeffield.hpp"
#include "fetidg/geometry.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <span>
#include <vector>

namespace fetidg {

enum class DofClass : std::uint8_t { Interior, Primal, Dual };

/// Ghost copy of a neighbour's trace on one shared edge, in edge-parameter order.
struct GhostBlock {
    int iface = 0;
    int neighbor = 0;
    int offset = 0;                   ///< first local dof of the block
    std::vector<int> neighbor_nodes;  ///< the neighbour's mesh nodes copied by the block
    int size() const { return static_cast<int>(neighbor_nodes.size()); }
};

/// Which native value a local dof stands for.
struct DofOrigin {
    int owner = 0;    ///< subdomain whose mesh holds the node
    int node = 0;     ///< node id in the owner's mesh
    int iface = -1;   ///< interior interface the dof lies on; -1 if none or if it is an edge endpoint
};

/// Augmented local space: the subdomain's own mesh nodes (dofs 0..num_native-1 in
/// lattice order) followed by one ghost block per interior interface.
struct LocalSpace {
    int subdomain = 0;
    int num_native = 0;
    int num_dofs = 0;
    std::vector<GhostBlock> ghosts;
    std::vector<DofOrigin> origin;
    std::vector<DofClass> cls;
    std::vector<int> interior;  ///< I: everything off Gamma', outer-boundary natives included
    std::vector<int> gamma;     ///< Gamma': natives on interior interfaces plus all ghosts
    std::vector<int> primal;    ///< corner dofs: endpoints of native and ghost edges
    std::vector<int> dual;      ///< Gamma' minus corners

    const GhostBlock& ghost_block(int iface) const;
    int ghost_dof(int iface, int k) const { return ghost_block(iface).offset + k; }
    bool is_ghost(int dof) const { return dof >= num_native; }
};

LocalSpace build_local_space(int sub, const Geometry& geometry);

/// Local primal dof -> global primal id. A global id stands for one native corner
/// value of one subdomain; its ghost copies in the neighbours share the id.
struct GlobalPrimalMap {
    int num_global = 0;
    std::vector<std::vector<int>> local_to_global;  ///< per subdomain, parallel to LocalSpace::primal
    std::vector<DofOrigin> global_origin;            ///< owner/node of each global id
};

GlobalPrimalMap classify_primal_dual(std::span<const LocalSpace> spaces, const Geometry& geometry);

/// Signed pairing of each dual native trace value with its ghost copy in the neighbour.
struct JumpMatrix {
    struct Row {
        int plus = 0;   ///< global dual index of the native dof
        int minus = 0;  ///< global dual index of the ghost copy
    };

    int num_dual = 0;
    std::vector<int> dual_offset;  ///< per subdomain, start of its block of dual columns (+ total at the end)
    std::vector<Row> rows;

    std::size_t num_rows() const { return rows.size(); }
    Eigen::VectorXd apply(const Eigen::VectorXd& u_dual) const;
    Eigen::VectorXd apply_transpose(const Eigen::VectorXd& lambda) const;
    Eigen::SparseMatrix<double> to_sparse() const;
};

JumpMatrix build_jump_matrix(std::span<const LocalSpace> spaces, const Geometry& geometry);

/// Diagonal scaling over the global dual numbering. A dual dof of subdomain i on
/// interface (i, j) gets abar_j / (abar_j + abar_i).
struct ScalingMatrix {
    Eigen::VectorXd diag;
};

ScalingMatrix build_scaling(std::span<const LocalSpace> spaces, const JumpMatrix& jump,
                            std::span<const LayerStats> layers, const Geometry& geometry);

/// B_D applied to a dual vector: row-wise D(plus) u(plus) - D(minus) u(minus).
Eigen::VectorXd apply_scaled_jump(const JumpMatrix& jump, const ScalingMatrix& scaling, const Eigen::VectorXd& u_dual);
/// B_D^T applied to a multiplier vector.
Eigen::VectorXd apply_scaled_jump_transpose(const JumpMatrix& jump, const ScalingMatrix& scaling,
                                            const Eigen::VectorXd& lambda);
/// P = B_D^T B applied matrix-free.
Eigen::VectorXd apply_jump_projection(const JumpMatrix& jump, const ScalingMatrix& scaling,
                                      const Eigen::VectorXd& u_dual);

/// All dof bookkeeping for one geometry.
struct DofLayout {
    std::vector<LocalSpace> spaces;
    GlobalPrimalMap primal;
    JumpMatrix jump;
    ScalingMatrix scaling;
};

DofLayout build_dof_layout(const Geometry& geometry, std::span<const LayerStats> layers);

} // namespace fetidg
