#pragma once

#include "fetidg/experiment.hpp"
#include "fetidg/fetidp.hpp"
#include "fetidg/oracle.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace fetidg::testing {

/// Islands of value `alpha` straddling each interior interface from the left/bottom
/// side: depth `depth`*H, length H/2, centered along the interface.
inline CoefficientField interface_islands(int nx, double alpha, double depth = 0.25)
{
    const double H = 1.0 / nx;
    std::vector<Inclusion> inc;
    for (int gy = 0; gy < nx; ++gy)
        for (int gx = 0; gx < nx; ++gx) {
            const double x = gx * H, y = gy * H;
            if (gx + 1 < nx)
                inc.push_back({{x + H - depth * H, y + H / 4, x + H, y + 3 * H / 4}, alpha});
            if (gy + 1 < nx)
                inc.push_back({{x + H / 4, y + H - depth * H, x + 3 * H / 4, y + H}, alpha});
        }
    return CoefficientField(1.0, std::move(inc));
}

/// Value `alpha` on subdomains with even gx + gy, 1 elsewhere.
inline CoefficientField checkerboard(int nx, double alpha)
{
    const double H = 1.0 / nx;
    std::vector<Inclusion> inc;
    for (int gy = 0; gy < nx; ++gy)
        for (int gx = 0; gx < nx; ++gx)
            if ((gx + gy) % 2 == 0)
                inc.push_back({{gx * H, gy * H, (gx + 1) * H, (gy + 1) * H}, alpha});
    return CoefficientField(1.0, std::move(inc));
}

inline Discretization make_problem(int nx, const std::string& mesh, const CoefficientField& field,
                                   double delta = kDefaultPenalty, const SourceFunction& f = unit_source)
{
    const auto n = parse_mesh_list(mesh, nx, nx);
    return discretize(build_geometry(nx, nx, n), field, delta, f);
}

inline std::vector<Vector> loads_of(const Discretization& p)
{
    std::vector<Vector> out;
    for (const auto& l : p.locals)
        out.push_back(l.load);
    return out;
}

struct FetiRun {
    SolveReport report;
    RecoveredSolution solution;
};

inline FetiRun run_feti(const Discretization& p, const FetiOperators& ops, double tol = 1e-6, int max_it = 1000)
{
    const auto loads = loads_of(p);
    const auto rhs = ops.compute_rhs(loads);
    FetiRun r;
    r.report = pcg_solve([&](const Vector& x) { return ops.apply_F(x); },
                         [&](const Vector& x) { return ops.apply_preconditioner(x); }, rhs.d, tol, max_it);
    r.solution = ops.recover_solution(r.report.lambda, rhs, loads);
    return r;
}

/// Relative l2 distance between FETI-DP natives and the monolithic direct solution.
inline double oracle_distance(const Discretization& p, const RecoveredSolution& sol,
                              const SourceFunction& f = unit_source)
{
    const auto mono = oracle::assemble_monolithic(p.geometry, p.coeffs, p.delta, f);
    const auto direct = oracle::direct_solve(mono);
    const auto parts = oracle::split_native(mono, direct.u);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        num += (parts[i] - sol.native[i]).squaredNorm();
        den += parts[i].squaredNorm();
    }
    return std::sqrt(num / den);
}

} // namespace fetidg::testing
