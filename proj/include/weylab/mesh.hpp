#pragma once

#include "errors.hpp"
#include "surface.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace weylab {

using Triangle = std::array<std::size_t, 3>;

/// Closed, consistently oriented triangle mesh standing in for the boundary.
///
/// Construction validates the manifold/orientation invariants and computes
/// area-weighted unit vertex normals.
class SurfaceMesh {
public:
    SurfaceMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
        : vertices_(std::move(vertices)), triangles_(std::move(triangles))
    {
        validate();
        compute_normals();
    }

    const std::vector<Vec3>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<Vec3>& normals() const { return normals_; }
    std::size_t vertex_count() const { return vertices_.size(); }

    double triangle_area(const Triangle& t) const
    {
        return 0.5 * (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]).norm();
    }

    double area() const
    {
        double a = 0.0;
        for (const auto& t : triangles_) a += triangle_area(t);
        return a;
    }

    double signed_volume() const
    {
        double v = 0.0;
        for (const auto& t : triangles_) {
            v += vertices_[t[0]].dot(vertices_[t[1]].cross(vertices_[t[2]]));
        }
        return v / 6.0;
    }

    /// Lumped vertex areas: one third of every incident triangle.
    std::vector<double> vertex_areas() const
    {
        std::vector<double> areas(vertices_.size(), 0.0);
        for (const auto& t : triangles_) {
            const double a = triangle_area(t) / 3.0;
            for (std::size_t v : t) areas[v] += a;
        }
        return areas;
    }

    /// One-point-per-vertex lumped rule; exact for piecewise-linear f.
    template <typename F>
    double integrate_vertex_values(F&& value_at_vertex) const
    {
        const auto areas = vertex_areas();
        double sum = 0.0;
        for (std::size_t i = 0; i < areas.size(); ++i) sum += areas[i] * value_at_vertex(i);
        return sum;
    }

    /// FNV-1a over the raw vertex coordinates and triangle indices.
    std::uint64_t content_hash() const
    {
        std::uint64_t h = 14695981039346656037ull;
        auto mix = [&h](const void* data, std::size_t n) {
            const auto* bytes = static_cast<const unsigned char*>(data);
            for (std::size_t i = 0; i < n; ++i) {
                h ^= bytes[i];
                h *= 1099511628211ull;
            }
        };
        const std::uint64_t nv = vertices_.size(), nt = triangles_.size();
        mix(&nv, sizeof nv);
        mix(&nt, sizeof nt);
        for (const auto& v : vertices_) mix(v.data(), 3 * sizeof(double));
        for (const auto& t : triangles_) {
            for (std::size_t idx : t) {
                const std::uint64_t i = idx;
                mix(&i, sizeof i);
            }
        }
        return h;
    }

private:
    void validate() const
    {
        if (vertices_.size() < 4 || triangles_.size() < 4) throw MeshQualityError("mesh is too small to be closed");
        std::map<std::pair<std::size_t, std::size_t>, int> directed;
        for (const auto& t : triangles_) {
            for (std::size_t v : t) {
                if (v >= vertices_.size()) throw MeshQualityError("triangle references a missing vertex");
            }
            if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) throw MeshQualityError("triangle repeats a vertex");
            for (int k = 0; k < 3; ++k) ++directed[{t[k], t[(k + 1) % 3]}];
        }
        for (const auto& [edge, count] : directed) {
            if (count != 1) throw MeshQualityError("inconsistent orientation: directed edge used twice");
            const auto twin = directed.find({edge.second, edge.first});
            if (twin == directed.end()) throw MeshQualityError("open mesh: edge shared by fewer than 2 triangles");
        }
        if (!(signed_volume() > 0.0)) throw MeshQualityError("mesh is not outward oriented (signed volume <= 0)");
    }

    void compute_normals()
    {
        normals_.assign(vertices_.size(), Vec3::Zero());
        for (const auto& t : triangles_) {
            const Vec3 n = (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]);
            for (std::size_t v : t) normals_[v] += n;
        }
        for (auto& n : normals_) {
            const double len = n.norm();
            if (!(len > 0.0)) throw MeshQualityError("vertex with vanishing normal");
            n /= len;
        }
    }

    std::vector<Vec3> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Vec3> normals_;
};

/// Icosahedron refined `level` times with vertices projected onto the unit sphere.
inline SurfaceMesh make_icosphere(int level)
{
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t}, {0, -1, -t},
        {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : v) p.normalize();
    std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9}, {4, 9, 5},
        {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> midpoint;
        auto mid = [&](std::size_t a, std::size_t b) {
            const auto key = std::minmax(a, b);
            const auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            midpoint.emplace(key, v.size() - 1);
            return v.size() - 1;
        };
        std::vector<Triangle> next;
        next.reserve(4 * f.size());
        for (const auto& tri : f) {
            const std::size_t ab = mid(tri[0], tri[1]), bc = mid(tri[1], tri[2]), ca = mid(tri[2], tri[0]);
            next.push_back({tri[0], ab, ca});
            next.push_back({tri[1], bc, ab});
            next.push_back({tri[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        f = std::move(next);
    }
    return SurfaceMesh(std::move(v), std::move(f));
}

// ---------------------------------------------------------------------------
// OFF files

namespace detail {

/// Next non-empty line with '#' comments stripped.
inline bool next_content_line(std::istream& in, std::string& line)
{
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
}

} // namespace detail

inline SurfaceMesh read_off(std::istream& in)
{
    std::string line;
    if (!detail::next_content_line(in, line)) throw FormatError("OFF: empty input");
    std::istringstream header(line);
    std::string magic;
    header >> magic;
    if (magic != "OFF") throw FormatError("OFF: missing 'OFF' header");
    std::size_t nv = 0, nf = 0, ne = 0;
    if (!(header >> nv)) {
        if (!detail::next_content_line(in, line)) throw FormatError("OFF: missing counts line");
        header = std::istringstream(line);
        header >> nv;
    }
    if (!(header >> nf >> ne)) throw FormatError("OFF: malformed counts line");

    std::vector<Vec3> vertices(nv);
    for (std::size_t i = 0; i < nv; ++i) {
        if (!detail::next_content_line(in, line)) throw FormatError("OFF: truncated vertex list");
        std::istringstream ls(line);
        if (!(ls >> vertices[i][0] >> vertices[i][1] >> vertices[i][2])) throw FormatError("OFF: malformed vertex");
    }
    std::vector<Triangle> triangles(nf);
    for (std::size_t i = 0; i < nf; ++i) {
        if (!detail::next_content_line(in, line)) throw FormatError("OFF: truncated face list");
        std::istringstream ls(line);
        std::size_t k = 0;
        if (!(ls >> k) || k != 3) throw FormatError("OFF: only triangle faces are supported");
        if (!(ls >> triangles[i][0] >> triangles[i][1] >> triangles[i][2])) throw FormatError("OFF: malformed face");
    }
    return SurfaceMesh(std::move(vertices), std::move(triangles));
}

inline SurfaceMesh read_off(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open mesh file '" + path + "'");
    return read_off(in);
}

inline void write_off(std::ostream& out, const SurfaceMesh& mesh)
{
    out << "OFF\n" << mesh.vertex_count() << ' ' << mesh.triangles().size() << " 0\n";
    out << std::setprecision(17);
    for (const auto& v : mesh.vertices()) out << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

/// Per-vertex gamma table: one decimal value per line, count equal to vertex count.
inline std::vector<double> read_gamma_table(std::istream& in, std::size_t expected_count)
{
    std::vector<double> values;
    std::string line;
    while (detail::next_content_line(in, line)) {
        std::istringstream ls(line);
        double v = 0.0;
        std::string rest;
        if (!(ls >> v) || (ls >> rest)) throw FormatError("gamma table: expected one value per line");
        values.push_back(v);
    }
    if (values.size() != expected_count) {
        throw FormatError("gamma table has " + std::to_string(values.size()) + " values, mesh has "
            + std::to_string(expected_count) + " vertices");
    }
    return values;
}

inline std::vector<double> read_gamma_table(const std::string& path, std::size_t expected_count)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open gamma table '" + path + "'");
    return read_gamma_table(in, expected_count);
}

// ---------------------------------------------------------------------------
// gamma on meshes

inline double gamma0_at_vertex(const GammaField& field, const SurfaceMesh& mesh, std::size_t i)
{
    return field.gamma0(mesh.vertices()[i], i);
}

inline GammaBounds gamma_bounds(const GammaField& field, const SurfaceMesh& mesh)
{
    if (field.kind() == GammaKind::per_vertex && field.table().size() != mesh.vertex_count()) {
        throw InvalidFieldError("per-vertex gamma table size does not match the mesh");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
        const double v = field.base(mesh.vertices()[i], i);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return bounds_from_base_range(field, lo, hi);
}

} // namespace weylab
