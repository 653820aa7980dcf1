#pragma once

#include "fetidg/coeffield.hpp"
#include "fetidg/dofspace.hpp"
#include "fetidg/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>

namespace fetidg {

using SparseMatrix = Eigen::SparseMatrix<double>;
using SourceFunction = std::function<double(double x, double y)>;

inline constexpr double kDefaultPenalty = 5.0;

/// P1 element stiffness for a constant coefficient: alpha * area * G G^T.
Eigen::Matrix3d element_stiffness(Point a, Point b, Point c, double alpha);

/// Local stiffness a_i on the augmented space (ghost rows/columns stay empty).
SparseMatrix assemble_volume(const SubdomainMesh& mesh, const std::vector<double>& triangle_alpha, int num_dofs);

/// Symmetric consistency terms s_i over all sides of subdomain `sub`: interior
/// interfaces with l = 2 against the ghost trace, outer sides with l = 1 and zero
/// exterior value. Normal derivatives come from the subdomain's triangle adjacent
/// to each merged segment.
SparseMatrix assemble_consistency(int sub, const Geometry& geometry, const CoefficientData& coeffs,
                                  const LocalSpace& space);

/// Interior-penalty terms p_i with exact edge integration on the merged meshes.
SparseMatrix assemble_penalty(int sub, const Geometry& geometry, const CoefficientData& coeffs,
                              const LocalSpace& space, double delta);

/// Vertex-rule load vector (exact for f linear per triangle); ghost entries are zero.
Eigen::VectorXd assemble_load(const SubdomainMesh& mesh, const SourceFunction& f, int num_dofs);

struct LocalSystem {
    SparseMatrix energy;       ///< a_i
    SparseMatrix consistency;  ///< s_i
    SparseMatrix penalty;      ///< p_i
    SparseMatrix A_prime;      ///< a_i + s_i + p_i
    SparseMatrix D;            ///< a_i + p_i
    Eigen::VectorXd load;
    int num_dofs() const { return static_cast<int>(A_prime.rows()); }
};

LocalSystem assemble_local(int sub, const Geometry& geometry, const CoefficientData& coeffs,
                           const LocalSpace& space, double delta, const SourceFunction& f);

double max_abs(const SparseMatrix& m);
/// max |A - A^T|
double asymmetry(const SparseMatrix& m);

} // namespace fetidg
