#pragma once

#include <array>
#include <limits>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace voleta {

using Vec3 = Eigen::Vector3d;

enum class LengthUnit { unitless, meters };

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle soup. Treated as immutable by every operation in meshkit;
/// transformations return a new mesh.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<Triangle> triangles;
    std::string name;
    LengthUnit unit = LengthUnit::unitless;

    bool empty() const { return triangles.empty(); }

    /// Throws InvalidInput if an index is out of range or a triangle repeats an index.
    void validate() const;
};

struct Aabb {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void extend(const Vec3& p)
    {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    bool valid() const { return lo.x() <= hi.x(); }
    double diagonal() const { return valid() ? (hi - lo).norm() : 0.0; }
};

struct ComponentInfo {
    int component_id = 0;
    std::vector<std::uint32_t> triangle_ids;
    int vertex_count = 0;
    double diameter = 0.0;
};

// --- I/O -----------------------------------------------------------------

/// Reads ASCII OBJ, or ASCII / binary little-endian PLY. Polygons are fan-triangulated;
/// triangles that collapse to a repeated index are dropped.
TriangleMesh load_mesh(const std::filesystem::path& path);

/// Writes by extension: .obj as ASCII, .ply as binary little-endian (double coordinates).
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

enum class PlyEncoding { ascii, binary_little_endian };
void save_ply(const TriangleMesh& mesh, const std::filesystem::path& path, PlyEncoding encoding);

// --- topology ------------------------------------------------------------

/// AABB over the vertices referenced by at least one triangle.
Aabb mesh_bounds(const TriangleMesh& mesh);

/// Union-find over triangles that share a vertex index. Components are numbered in
/// order of their first triangle.
std::vector<ComponentInfo> connected_components(const TriangleMesh& mesh);

/// Deletes every component whose AABB diagonal is <= diameter_fraction times the whole
/// mesh's AABB diagonal, then drops unreferenced vertices.
TriangleMesh remove_isolated_pieces(const TriangleMesh& mesh, double diameter_fraction);

/// Drops vertices no triangle references and re-indexes, preserving vertex order.
TriangleMesh prune_unreferenced(const TriangleMesh& mesh);

/// Merges vertices closer than eps (opt-in pre-step before connected_components).
TriangleMesh weld_vertices(const TriangleMesh& mesh, double eps = 1e-7);

/// Number of edges used by exactly one triangle; 0 for a closed mesh.
std::size_t boundary_edge_count(const TriangleMesh& mesh);

// --- measures ------------------------------------------------------------

/// Sum of signed tetrahedra to the origin. Positive for outward orientation.
double signed_volume(const TriangleMesh& mesh);

/// |signed_volume|, in unit^3 of the vertices.
double mesh_volume(const TriangleMesh& mesh);

double surface_area(const TriangleMesh& mesh);

TriangleMesh scale_mesh(const TriangleMesh& mesh, double s, LengthUnit result_unit = LengthUnit::meters);
TriangleMesh translate_mesh(const TriangleMesh& mesh, const Vec3& offset);

// --- primitives ------------------------------------------------------------

/// Axis-aligned box [lo, hi] with outward-facing triangles (12 faces, 8 vertices).
TriangleMesh make_box(const Vec3& lo, const Vec3& hi);
TriangleMesh make_unit_cube();
TriangleMesh make_unit_tetrahedron();
/// Subdivided icosahedron projected onto a sphere of the given radius around center.
TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());
/// Concatenates meshes; indices of later meshes are offset.
TriangleMesh merge_meshes(const std::vector<TriangleMesh>& parts);

} // namespace voleta
