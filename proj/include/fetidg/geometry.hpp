#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace fetidg {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Sides of an axis-aligned square, counter-clockwise from the bottom.
enum class Side : int { Bottom = 0, Right = 1, Top = 2, Left = 3 };

inline constexpr std::array<Side, 4> kAllSides = {Side::Bottom, Side::Right, Side::Top, Side::Left};

const char* to_string(Side side);

/// One square subdomain of the unit square. Ids are row-major from the bottom row.
struct Subdomain {
    int id = 0;
    int gx = 0;
    int gy = 0;
    Point origin;
    double size = 0.0;
};

struct DomainPartition {
    int nx = 0;
    int ny = 0;
    double H = 0.0;
    std::vector<Subdomain> subdomains;

    std::size_t size() const { return subdomains.size(); }
    int id_at(int gx, int gy) const { return gy * nx + gx; }
};

/// Structured right-triangle mesh of one subdomain.
///
/// Vertex (ix, iy) has index iy*(n+1)+ix. Cell (ix, iy) holds the lower triangle
/// (v00, v10, v11) at index 2*(iy*n+ix) and the upper triangle (v00, v11, v01)
/// at index 2*(iy*n+ix)+1, so every diagonal runs bottom-left to top-right and
/// every triangle is counter-clockwise.
struct SubdomainMesh {
    int subdomain = 0;
    int n = 0;
    double h = 0.0;
    Point origin;
    std::vector<Point> vertices;
    std::vector<std::array<int, 3>> triangles;
    /// Per side (indexed by Side), the n+1 nodes ordered by increasing x (bottom/top)
    /// or increasing y (left/right).
    std::array<std::vector<int>, 4> boundary_nodes;

    int vertex(int ix, int iy) const { return iy * (n + 1) + ix; }
    int lower_triangle(int ix, int iy) const { return 2 * (iy * n + ix); }
    int upper_triangle(int ix, int iy) const { return 2 * (iy * n + ix) + 1; }
    std::size_t num_vertices() const { return vertices.size(); }
    std::size_t num_triangles() const { return triangles.size(); }
    bool on_boundary(int v) const;
    /// The unique triangle having boundary interval k of `side` as an edge.
    int boundary_triangle(Side side, int k) const;
    double signed_area(int t) const;
};

/// A shared edge between subdomains `first` (left/bottom) and `second` (right/top).
/// The edge parameter t runs from `start` to `end` along +y (vertical) or +x (horizontal).
struct EdgeInterface {
    int id = 0;
    int first = 0;
    int second = 0;
    Side first_side = Side::Right;
    Side second_side = Side::Left;
    Point start;
    Point end;
    double length = 0.0;
    int first_n = 0;
    int second_n = 0;
    std::vector<int> first_nodes;   ///< first's mesh nodes on the edge (its own grid)
    std::vector<int> second_nodes;  ///< second's mesh nodes on the edge (its own grid)

    bool vertical() const { return first_side == Side::Right; }
    int other(int sub) const { return sub == first ? second : first; }
    bool is_first(int sub) const { return sub == first; }
    Side side_of(int sub) const { return sub == first ? first_side : second_side; }
    int n_of(int sub) const { return sub == first ? first_n : second_n; }
    const std::vector<int>& nodes_of(int sub) const { return sub == first ? first_nodes : second_nodes; }
};

/// Per-subdomain view of which sides are interior interfaces.
struct InterfaceSet {
    std::vector<EdgeInterface> interfaces;
    /// side_interface[i][side] is the interface id on that side, or -1 for an outer side.
    std::vector<std::array<int, 4>> side_interface;

    /// Interior interface ids of subdomain i in side order (bottom, right, top, left).
    std::vector<int> interior_of(int sub) const;
    /// Outer boundary sides of subdomain i in side order.
    std::vector<Side> outer_sides_of(int sub) const;
};

struct MergedSegment {
    double t0 = 0.0;
    double t1 = 0.0;
    double length = 0.0;
    int first_interval = 0;   ///< interval k of first's edge grid, between nodes k and k+1
    int second_interval = 0;
    int first_triangle = 0;   ///< first's triangle adjacent to the interval
    int second_triangle = 0;
};

/// Common refinement of both sides' edge grids.
struct MergedEdgeMesh {
    int iface = 0;
    std::vector<double> breakpoints;  ///< edge parameters in [0, length]
    std::vector<MergedSegment> segments;
};

DomainPartition build_partition(int nx, int ny);
SubdomainMesh triangulate_subdomain(const Subdomain& sub, int n);
InterfaceSet discover_interfaces(const DomainPartition& partition, std::span<const SubdomainMesh> meshes);
MergedEdgeMesh merge_edge_meshes(const EdgeInterface& iface);

/// Everything the discretization needs about the mesh layout.
struct Geometry {
    DomainPartition partition;
    std::vector<SubdomainMesh> meshes;
    InterfaceSet topology;
    std::vector<MergedEdgeMesh> merged;  ///< indexed by interface id

    std::size_t num_subdomains() const { return partition.size(); }
    const EdgeInterface& iface(int id) const { return topology.interfaces[static_cast<std::size_t>(id)]; }
};

/// Builds the full geometry. `n_per_subdomain` has either one entry (uniform) or one per subdomain.
Geometry build_geometry(int nx, int ny, std::span<const int> n_per_subdomain);

/// Plain-text dump: "node id x y" lines then "tri id v0 v1 v2" lines.
void write_mesh(std::ostream& out, const SubdomainMesh& mesh);

} // namespace fetidg
