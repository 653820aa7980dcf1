#include "fetidg/problem.hpp"

namespace fetidg {

Discretization discretize(Geometry geometry, CoefficientField field, double delta, const SourceFunction& f)
{
    Discretization d{std::move(geometry), std::move(field), {}, {}, {}, delta};
    d.coeffs = sample_coefficients(d.geometry, d.field);
    d.layout = build_dof_layout(d.geometry, d.coeffs.layers);
    d.locals.reserve(d.geometry.num_subdomains());
    for (std::size_t i = 0; i < d.geometry.num_subdomains(); ++i)
        d.locals.push_back(assemble_local(static_cast<int>(i), d.geometry, d.coeffs, d.layout.spaces[i], delta, f));
    return d;
}

} // namespace fetidg
