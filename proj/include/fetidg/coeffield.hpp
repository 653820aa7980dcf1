#pragma once

#include "fetidg/geometry.hpp"

#include <vector>

namespace fetidg {

/// Axis-aligned rectangle [x0, x1] x [y0, y1] in global coordinates.
struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    /// Strict interior test; points on the boundary are outside.
    bool contains_strictly(Point p) const { return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1; }
};

struct Inclusion {
    Rect box;
    double value = 1.0;
};

/// Piecewise-constant coefficient: a background value overridden by rectangular
/// inclusions. Triangles take the value at their centroid; when inclusions
/// overlap, the last one listed wins. All values must be >= 1.
class CoefficientField {
public:
    explicit CoefficientField(double background = 1.0, std::vector<Inclusion> inclusions = {});

    double background() const { return background_; }
    const std::vector<Inclusion>& inclusions() const { return inclusions_; }

    double at(Point p) const;
    /// Returns a copy with every value multiplied by `factor` (factor >= 1 keeps the normalization).
    CoefficientField scaled(double factor) const;

private:
    double background_;
    std::vector<Inclusion> inclusions_;
};

double eval_triangle_alpha(const CoefficientField& field, const SubdomainMesh& mesh, int triangle);

/// Per-triangle values for one mesh.
std::vector<double> sample_triangles(const CoefficientField& field, const SubdomainMesh& mesh);

/// Coefficient extrema over the boundary layer: triangles with a vertex on the subdomain boundary.
struct LayerStats {
    double alpha_lo = 1.0;
    double alpha_hi = 1.0;
};

LayerStats boundary_layer_stats(const SubdomainMesh& mesh, const std::vector<double>& triangle_alpha);

struct InterfaceCoefficients {
    std::vector<double> alpha;  ///< harmonic average per merged segment
    double h = 0.0;             ///< harmonic average of the two mesh sizes
};

inline double harmonic_mean(double a, double b) { return 2.0 * a * b / (a + b); }

InterfaceCoefficients harmonic_averages(const EdgeInterface& iface, const MergedEdgeMesh& merged,
                                        const std::vector<double>& first_alpha, const std::vector<double>& second_alpha,
                                        double first_h, double second_h);

/// Sampled coefficients for a whole geometry.
struct CoefficientData {
    std::vector<std::vector<double>> triangle_alpha;  ///< per subdomain, per triangle
    std::vector<LayerStats> layers;                   ///< per subdomain
    std::vector<InterfaceCoefficients> interfaces;    ///< per interface
};

CoefficientData sample_coefficients(const Geometry& geometry, const CoefficientField& field);

} // namespace fetidg
