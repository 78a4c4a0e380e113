#include "voleta/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

#include "voleta/errors.hpp"
#include "voleta/kernels.hpp"

namespace voleta {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0u); }

    std::uint32_t find(std::uint32_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::uint32_t a, std::uint32_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return;
        if (rank_[a] < rank_[b])
            std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b])
            ++rank_[a];
    }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint8_t> rank_;
};

TriangleMesh with_triangles(const TriangleMesh& src, std::vector<Triangle> tris)
{
    TriangleMesh out;
    out.vertices = src.vertices;
    out.triangles = std::move(tris);
    out.name = src.name;
    out.unit = src.unit;
    return prune_unreferenced(out);
}

} // namespace

void TriangleMesh::validate() const
{
    const auto n = vertices.size();
    for (std::size_t i = 0; i < triangles.size(); ++i) {
        const auto& t = triangles[i];
        for (auto idx : t)
            if (idx >= n)
                throw InvalidInput("triangle " + std::to_string(i) + " references vertex " + std::to_string(idx) +
                                   " of " + std::to_string(n));
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            throw InvalidInput("triangle " + std::to_string(i) + " is degenerate (repeated index)");
    }
    for (const auto& v : vertices)
        if (!v.allFinite())
            throw InvalidInput("mesh has a non-finite vertex");
}

Aabb mesh_bounds(const TriangleMesh& mesh)
{
    Aabb box;
    for (const auto& t : mesh.triangles)
        for (auto idx : t)
            box.extend(mesh.vertices[idx]);
    return box;
}

std::vector<ComponentInfo> connected_components(const TriangleMesh& mesh)
{
    DisjointSets sets(mesh.vertices.size());
    for (const auto& t : mesh.triangles) {
        sets.unite(t[0], t[1]);
        sets.unite(t[1], t[2]);
    }

    std::unordered_map<std::uint32_t, int> root_to_component;
    std::vector<ComponentInfo> comps;
    std::vector<Aabb> boxes;
    for (std::uint32_t i = 0; i < mesh.triangles.size(); ++i) {
        const auto root = sets.find(mesh.triangles[i][0]);
        auto [it, inserted] = root_to_component.try_emplace(root, static_cast<int>(comps.size()));
        if (inserted) {
            ComponentInfo info;
            info.component_id = it->second;
            comps.push_back(std::move(info));
            boxes.emplace_back();
        }
        comps[it->second].triangle_ids.push_back(i);
        for (auto idx : mesh.triangles[i])
            boxes[it->second].extend(mesh.vertices[idx]);
    }

    std::vector<std::uint8_t> seen(mesh.vertices.size(), 0);
    for (std::size_t c = 0; c < comps.size(); ++c) {
        int count = 0;
        for (auto tid : comps[c].triangle_ids)
            for (auto idx : mesh.triangles[tid])
                if (!seen[idx]) {
                    seen[idx] = 1;
                    ++count;
                }
        comps[c].vertex_count = count;
        comps[c].diameter = boxes[c].diagonal();
    }
    return comps;
}

TriangleMesh remove_isolated_pieces(const TriangleMesh& mesh, double diameter_fraction)
{
    if (!(diameter_fraction >= 0.0 && diameter_fraction <= 1.0))
        throw_invalid("remove_isolated_pieces: diameter fraction must lie in [0,1]");
    if (mesh.empty())
        return mesh;

    const double threshold = diameter_fraction * mesh_bounds(mesh).diagonal();
    std::vector<std::uint8_t> keep(mesh.triangles.size(), 0);
    for (const auto& comp : connected_components(mesh))
        if (comp.diameter > threshold)
            for (auto tid : comp.triangle_ids)
                keep[tid] = 1;

    std::vector<Triangle> tris;
    tris.reserve(mesh.triangles.size());
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i)
        if (keep[i])
            tris.push_back(mesh.triangles[i]);
    return with_triangles(mesh, std::move(tris));
}

TriangleMesh prune_unreferenced(const TriangleMesh& mesh)
{
    constexpr auto kUnused = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> remap(mesh.vertices.size(), kUnused);
    for (const auto& t : mesh.triangles)
        for (auto idx : t)
            remap[idx] = 0;

    TriangleMesh out;
    out.name = mesh.name;
    out.unit = mesh.unit;
    for (std::size_t i = 0; i < remap.size(); ++i)
        if (remap[i] != kUnused) {
            remap[i] = static_cast<std::uint32_t>(out.vertices.size());
            out.vertices.push_back(mesh.vertices[i]);
        }
    out.triangles.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles)
        out.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
    return out;
}

TriangleMesh weld_vertices(const TriangleMesh& mesh, double eps)
{
    if (!(eps > 0.0))
        throw_invalid("weld_vertices: eps must be positive");

    using Cell = std::array<std::int64_t, 3>;
    auto cell_of = [eps](const Vec3& p) {
        return Cell{static_cast<std::int64_t>(std::floor(p.x() / eps)), static_cast<std::int64_t>(std::floor(p.y() / eps)),
                    static_cast<std::int64_t>(std::floor(p.z() / eps))};
    };

    std::map<Cell, std::vector<std::uint32_t>> grid;
    std::vector<std::uint32_t> remap(mesh.vertices.size());
    TriangleMesh out;
    out.name = mesh.name;
    out.unit = mesh.unit;
    for (std::uint32_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& p = mesh.vertices[i];
        const Cell c = cell_of(p);
        std::int64_t match = -1;
        for (std::int64_t dx = -1; dx <= 1 && match < 0; ++dx)
            for (std::int64_t dy = -1; dy <= 1 && match < 0; ++dy)
                for (std::int64_t dz = -1; dz <= 1 && match < 0; ++dz) {
                    auto it = grid.find({c[0] + dx, c[1] + dy, c[2] + dz});
                    if (it == grid.end())
                        continue;
                    for (auto j : it->second)
                        if ((out.vertices[j] - p).norm() <= eps) {
                            match = j;
                            break;
                        }
                }
        if (match < 0) {
            match = static_cast<std::int64_t>(out.vertices.size());
            out.vertices.push_back(p);
            grid[c].push_back(static_cast<std::uint32_t>(match));
        }
        remap[i] = static_cast<std::uint32_t>(match);
    }
    for (const auto& t : mesh.triangles) {
        const Triangle r{remap[t[0]], remap[t[1]], remap[t[2]]};
        if (r[0] != r[1] && r[1] != r[2] && r[0] != r[2])
            out.triangles.push_back(r);
    }
    return out;
}

std::size_t boundary_edge_count(const TriangleMesh& mesh)
{
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> uses;
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            auto a = t[k], b = t[(k + 1) % 3];
            if (a > b)
                std::swap(a, b);
            ++uses[{a, b}];
        }
    return static_cast<std::size_t>(std::count_if(uses.begin(), uses.end(), [](const auto& e) { return e.second == 1; }));
}

double signed_volume(const TriangleMesh& mesh)
{
    return kernels::signed_volume(mesh.vertices, mesh.triangles);
}

double mesh_volume(const TriangleMesh& mesh)
{
    return std::abs(signed_volume(mesh));
}

double surface_area(const TriangleMesh& mesh)
{
    double area = 0.0;
    for (const auto& t : mesh.triangles)
        area += 0.5 * (mesh.vertices[t[1]] - mesh.vertices[t[0]]).cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]).norm();
    return area;
}

TriangleMesh scale_mesh(const TriangleMesh& mesh, double s, LengthUnit result_unit)
{
    if (!(s > 0.0) || !std::isfinite(s))
        throw_invalid("scale_mesh: scale must be a positive finite number");
    TriangleMesh out = mesh;
    for (auto& v : out.vertices)
        v *= s;
    out.unit = result_unit;
    return out;
}

TriangleMesh translate_mesh(const TriangleMesh& mesh, const Vec3& offset)
{
    TriangleMesh out = mesh;
    for (auto& v : out.vertices)
        v += offset;
    return out;
}

TriangleMesh make_box(const Vec3& lo, const Vec3& hi)
{
    TriangleMesh m;
    m.name = "box";
    for (int i = 0; i < 8; ++i)
        m.vertices.emplace_back(i & 1 ? hi.x() : lo.x(), i & 2 ? hi.y() : lo.y(), i & 4 ? hi.z() : lo.z());
    // Outward (counter-clockwise seen from outside) winding.
    m.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                   {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
    return m;
}

TriangleMesh make_unit_cube()
{
    auto m = make_box(Vec3::Zero(), Vec3::Ones());
    m.name = "unit_cube";
    return m;
}

TriangleMesh make_unit_tetrahedron()
{
    TriangleMesh m;
    m.name = "tetrahedron";
    m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    m.triangles = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
    return m;
}

TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center)
{
    if (subdivisions < 0)
        throw_invalid("make_icosphere: negative subdivision level");
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                           {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : v)
        p.normalize();
    std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                               {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
                               {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};

    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
        auto mid = [&](std::uint32_t a, std::uint32_t b) {
            auto key = std::minmax(a, b);
            auto [it, inserted] = midpoint.try_emplace({key.first, key.second}, 0u);
            if (inserted) {
                it->second = static_cast<std::uint32_t>(v.size());
                v.push_back((v[a] + v[b]).normalized());
            }
            return it->second;
        };
        std::vector<Triangle> next;
        next.reserve(f.size() * 4);
        for (const auto& tri : f) {
            const auto ab = mid(tri[0], tri[1]), bc = mid(tri[1], tri[2]), ca = mid(tri[2], tri[0]);
            next.push_back({tri[0], ab, ca});
            next.push_back({tri[1], bc, ab});
            next.push_back({tri[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        f = std::move(next);
    }

    TriangleMesh m;
    m.name = "icosphere";
    m.vertices.reserve(v.size());
    for (const auto& p : v)
        m.vertices.push_back(center + radius * p);
    m.triangles = std::move(f);
    return m;
}

TriangleMesh merge_meshes(const std::vector<TriangleMesh>& parts)
{
    TriangleMesh out;
    for (const auto& p : parts) {
        const auto offset = static_cast<std::uint32_t>(out.vertices.size());
        out.vertices.insert(out.vertices.end(), p.vertices.begin(), p.vertices.end());
        for (const auto& t : p.triangles)
            out.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
        if (out.name.empty())
            out.name = p.name;
        out.unit = p.unit;
    }
    return out;
}

} // namespace voleta
