#include "fetidg/geometry.hpp"

#include "fetidg/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace fetidg {

const char* to_string(Side side)
{
    switch (side) {
    case Side::Bottom: return "bottom";
    case Side::Right: return "right";
    case Side::Top: return "top";
    case Side::Left: return "left";
    }
    return "?";
}

DomainPartition build_partition(int nx, int ny)
{
    if (nx < 1 || ny < 1)
        throw ConfigError("subdomain counts must be positive, got " + std::to_string(nx) + "x" + std::to_string(ny));
    if (nx != ny)
        throw ConfigError("only square subdomains are supported (nx == ny), got " + std::to_string(nx) + "x" +
                          std::to_string(ny));

    DomainPartition p;
    p.nx = nx;
    p.ny = ny;
    p.H = 1.0 / nx;
    p.subdomains.reserve(static_cast<std::size_t>(nx * ny));
    for (int gy = 0; gy < ny; ++gy) {
        for (int gx = 0; gx < nx; ++gx) {
            Subdomain s;
            s.id = gy * nx + gx;
            s.gx = gx;
            s.gy = gy;
            s.origin = {static_cast<double>(gx) / nx, static_cast<double>(gy) / ny};
            s.size = p.H;
            p.subdomains.push_back(s);
        }
    }
    return p;
}

bool SubdomainMesh::on_boundary(int v) const
{
    const int ix = v % (n + 1);
    const int iy = v / (n + 1);
    return ix == 0 || iy == 0 || ix == n || iy == n;
}

int SubdomainMesh::boundary_triangle(Side side, int k) const
{
    switch (side) {
    case Side::Bottom: return lower_triangle(k, 0);
    case Side::Right: return lower_triangle(n - 1, k);
    case Side::Top: return upper_triangle(k, n - 1);
    case Side::Left: return upper_triangle(0, k);
    }
    return -1;
}

double SubdomainMesh::signed_area(int t) const
{
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    const Point& a = vertices[static_cast<std::size_t>(tri[0])];
    const Point& b = vertices[static_cast<std::size_t>(tri[1])];
    const Point& c = vertices[static_cast<std::size_t>(tri[2])];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

SubdomainMesh triangulate_subdomain(const Subdomain& sub, int n)
{
    if (n < 2)
        throw ConfigError("subdomain " + std::to_string(sub.id) + ": need at least 2 segments per side, got " +
                          std::to_string(n));

    SubdomainMesh m;
    m.subdomain = sub.id;
    m.n = n;
    m.h = sub.size / n;
    m.origin = sub.origin;

    m.vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int iy = 0; iy <= n; ++iy)
        for (int ix = 0; ix <= n; ++ix)
            m.vertices.push_back({sub.origin.x + sub.size * ix / n, sub.origin.y + sub.size * iy / n});

    m.triangles.reserve(static_cast<std::size_t>(2 * n * n));
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const int v00 = m.vertex(ix, iy);
            const int v10 = m.vertex(ix + 1, iy);
            const int v11 = m.vertex(ix + 1, iy + 1);
            const int v01 = m.vertex(ix, iy + 1);
            m.triangles.push_back({v00, v10, v11});
            m.triangles.push_back({v00, v11, v01});
        }
    }

    for (auto& list : m.boundary_nodes)
        list.resize(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        m.boundary_nodes[static_cast<int>(Side::Bottom)][uk] = m.vertex(k, 0);
        m.boundary_nodes[static_cast<int>(Side::Right)][uk] = m.vertex(n, k);
        m.boundary_nodes[static_cast<int>(Side::Top)][uk] = m.vertex(k, n);
        m.boundary_nodes[static_cast<int>(Side::Left)][uk] = m.vertex(0, k);
    }
    return m;
}

std::vector<int> InterfaceSet::interior_of(int sub) const
{
    std::vector<int> out;
    for (int id : side_interface[static_cast<std::size_t>(sub)])
        if (id >= 0)
            out.push_back(id);
    return out;
}

std::vector<Side> InterfaceSet::outer_sides_of(int sub) const
{
    std::vector<Side> out;
    for (Side s : kAllSides)
        if (side_interface[static_cast<std::size_t>(sub)][static_cast<int>(s)] < 0)
            out.push_back(s);
    return out;
}

InterfaceSet discover_interfaces(const DomainPartition& partition, std::span<const SubdomainMesh> meshes)
{
    InterfaceSet set;
    set.side_interface.assign(partition.size(), {-1, -1, -1, -1});

    auto add = [&](int a, int b, bool vertical) {
        const auto& ma = meshes[static_cast<std::size_t>(a)];
        const auto& mb = meshes[static_cast<std::size_t>(b)];
        const auto& sa = partition.subdomains[static_cast<std::size_t>(a)];
        EdgeInterface e;
        e.id = static_cast<int>(set.interfaces.size());
        e.first = a;
        e.second = b;
        e.first_side = vertical ? Side::Right : Side::Top;
        e.second_side = vertical ? Side::Left : Side::Bottom;
        e.length = partition.H;
        if (vertical) {
            e.start = {sa.origin.x + sa.size, sa.origin.y};
            e.end = {sa.origin.x + sa.size, sa.origin.y + sa.size};
        } else {
            e.start = {sa.origin.x, sa.origin.y + sa.size};
            e.end = {sa.origin.x + sa.size, sa.origin.y + sa.size};
        }
        e.first_n = ma.n;
        e.second_n = mb.n;
        e.first_nodes = ma.boundary_nodes[static_cast<int>(e.first_side)];
        e.second_nodes = mb.boundary_nodes[static_cast<int>(e.second_side)];
        set.side_interface[static_cast<std::size_t>(a)][static_cast<int>(e.first_side)] = e.id;
        set.side_interface[static_cast<std::size_t>(b)][static_cast<int>(e.second_side)] = e.id;
        set.interfaces.push_back(std::move(e));
    };

    // Vertical interfaces first, then horizontal, each in row-major order.
    for (int gy = 0; gy < partition.ny; ++gy)
        for (int gx = 0; gx + 1 < partition.nx; ++gx)
            add(partition.id_at(gx, gy), partition.id_at(gx + 1, gy), true);
    for (int gy = 0; gy + 1 < partition.ny; ++gy)
        for (int gx = 0; gx < partition.nx; ++gx)
            add(partition.id_at(gx, gy), partition.id_at(gx, gy + 1), false);
    return set;
}

MergedEdgeMesh merge_edge_meshes(const EdgeInterface& iface)
{
    const double L = iface.length;
    const double tol = 1e-12 * L;

    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(iface.first_n + iface.second_n + 2));
    for (int k = 0; k <= iface.first_n; ++k)
        pts.push_back(L * k / iface.first_n);
    for (int k = 0; k <= iface.second_n; ++k)
        pts.push_back(L * k / iface.second_n);
    std::sort(pts.begin(), pts.end());

    MergedEdgeMesh merged;
    merged.iface = iface.id;
    for (double t : pts)
        if (merged.breakpoints.empty() || t - merged.breakpoints.back() > tol)
            merged.breakpoints.push_back(t);

    const double h1 = L / iface.first_n;
    const double h2 = L / iface.second_n;
    const auto& mesh_interval = [](double mid, double h, int n) {
        return std::clamp(static_cast<int>(std::floor(mid / h)), 0, n - 1);
    };

    for (std::size_t s = 0; s + 1 < merged.breakpoints.size(); ++s) {
        MergedSegment seg;
        seg.t0 = merged.breakpoints[s];
        seg.t1 = merged.breakpoints[s + 1];
        seg.length = seg.t1 - seg.t0;
        if (seg.length <= tol)
            throw ConfigError("interface " + std::to_string(iface.id) + ": degenerate merged segment");
        const double mid = 0.5 * (seg.t0 + seg.t1);
        seg.first_interval = mesh_interval(mid, h1, iface.first_n);
        seg.second_interval = mesh_interval(mid, h2, iface.second_n);
        merged.segments.push_back(seg);
    }
    return merged;
}

Geometry build_geometry(int nx, int ny, std::span<const int> n_per_subdomain)
{
    Geometry g;
    g.partition = build_partition(nx, ny);
    const std::size_t count = g.partition.size();
    if (n_per_subdomain.size() != 1 && n_per_subdomain.size() != count)
        throw ConfigError("expected 1 or " + std::to_string(count) + " mesh sizes, got " +
                          std::to_string(n_per_subdomain.size()));

    g.meshes.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const int n = n_per_subdomain.size() == 1 ? n_per_subdomain[0] : n_per_subdomain[i];
        g.meshes.push_back(triangulate_subdomain(g.partition.subdomains[i], n));
    }
    g.topology = discover_interfaces(g.partition, g.meshes);

    g.merged.reserve(g.topology.interfaces.size());
    for (const auto& e : g.topology.interfaces) {
        auto m = merge_edge_meshes(e);
        const auto& m1 = g.meshes[static_cast<std::size_t>(e.first)];
        const auto& m2 = g.meshes[static_cast<std::size_t>(e.second)];
        for (auto& seg : m.segments) {
            seg.first_triangle = m1.boundary_triangle(e.first_side, seg.first_interval);
            seg.second_triangle = m2.boundary_triangle(e.second_side, seg.second_interval);
        }
        g.merged.push_back(std::move(m));
    }
    return g;
}

void write_mesh(std::ostream& out, const SubdomainMesh& mesh)
{
    out.precision(17);
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
        out << "node " << v << ' ' << mesh.vertices[v].x << ' ' << mesh.vertices[v].y << '\n';
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        out << "tri " << t << ' ' << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
    }
}

} // namespace fetidg
