#pragma once

#include "fetidg/assembly.hpp"
#include "fetidg/coeffield.hpp"
#include "fetidg/dofspace.hpp"
#include "fetidg/geometry.hpp"

#include <vector>

namespace fetidg {

/// A fully assembled composite FE/DG problem, ready for the FETI-DP operators.
struct Discretization {
    Geometry geometry;
    CoefficientField field;
    CoefficientData coeffs;
    DofLayout layout;
    std::vector<LocalSystem> locals;
    double delta = kDefaultPenalty;
};

Discretization discretize(Geometry geometry, CoefficientField field, double delta, const SourceFunction& f);

inline double unit_source(double, double) { return 1.0; }

} // namespace fetidg
