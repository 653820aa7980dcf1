#include "fetidg/coeffield.hpp"

#include "fetidg/error.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace fetidg {

CoefficientField::CoefficientField(double background, std::vector<Inclusion> inclusions)
    : background_(background), inclusions_(std::move(inclusions))
{
    if (!(background_ >= 1.0))
        throw ConfigError("coefficient background must be >= 1, got " + std::to_string(background_));
    for (const auto& inc : inclusions_) {
        if (!(inc.value >= 1.0))
            throw ConfigError("inclusion value must be >= 1, got " + std::to_string(inc.value));
        if (!(inc.box.x1 > inc.box.x0) || !(inc.box.y1 > inc.box.y0))
            throw ConfigError("inclusion rectangle must have positive extent");
    }
}

double CoefficientField::at(Point p) const
{
    double value = background_;
    for (const auto& inc : inclusions_)
        if (inc.box.contains_strictly(p))
            value = inc.value;
    return value;
}

CoefficientField CoefficientField::scaled(double factor) const
{
    auto incs = inclusions_;
    for (auto& inc : incs)
        inc.value *= factor;
    return CoefficientField(background_ * factor, std::move(incs));
}

double eval_triangle_alpha(const CoefficientField& field, const SubdomainMesh& mesh, int triangle)
{
    const auto& tri = mesh.triangles[static_cast<std::size_t>(triangle)];
    Point c;
    for (int v : tri) {
        c.x += mesh.vertices[static_cast<std::size_t>(v)].x;
        c.y += mesh.vertices[static_cast<std::size_t>(v)].y;
    }
    c.x /= 3.0;
    c.y /= 3.0;
    return field.at(c);
}

std::vector<double> sample_triangles(const CoefficientField& field, const SubdomainMesh& mesh)
{
    std::vector<double> out(mesh.num_triangles());
    for (std::size_t t = 0; t < out.size(); ++t)
        out[t] = eval_triangle_alpha(field, mesh, static_cast<int>(t));
    return out;
}

LayerStats boundary_layer_stats(const SubdomainMesh& mesh, const std::vector<double>& triangle_alpha)
{
    LayerStats s{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        if (std::none_of(tri.begin(), tri.end(), [&](int v) { return mesh.on_boundary(v); }))
            continue;
        s.alpha_lo = std::min(s.alpha_lo, triangle_alpha[t]);
        s.alpha_hi = std::max(s.alpha_hi, triangle_alpha[t]);
    }
    return s;
}

InterfaceCoefficients harmonic_averages(const EdgeInterface& /*iface*/, const MergedEdgeMesh& merged,
                                        const std::vector<double>& first_alpha, const std::vector<double>& second_alpha,
                                        double first_h, double second_h)
{
    InterfaceCoefficients c;
    c.h = harmonic_mean(first_h, second_h);
    c.alpha.reserve(merged.segments.size());
    for (const auto& seg : merged.segments)
        c.alpha.push_back(harmonic_mean(first_alpha[static_cast<std::size_t>(seg.first_triangle)],
                                        second_alpha[static_cast<std::size_t>(seg.second_triangle)]));
    return c;
}

CoefficientData sample_coefficients(const Geometry& geometry, const CoefficientField& field)
{
    CoefficientData d;
    d.triangle_alpha.reserve(geometry.meshes.size());
    for (const auto& m : geometry.meshes) {
        d.triangle_alpha.push_back(sample_triangles(field, m));
        d.layers.push_back(boundary_layer_stats(m, d.triangle_alpha.back()));
    }
    for (const auto& e : geometry.topology.interfaces) {
        const auto i = static_cast<std::size_t>(e.first);
        const auto j = static_cast<std::size_t>(e.second);
        d.interfaces.push_back(harmonic_averages(e, geometry.merged[static_cast<std::size_t>(e.id)],
                                                 d.triangle_alpha[i], d.triangle_alpha[j], geometry.meshes[i].h,
                                                 geometry.meshes[j].h));
    }
    return d;
}

} // namespace fetidg
