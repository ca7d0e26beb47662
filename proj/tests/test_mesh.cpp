#include <weylab/mesh.hpp>

#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

using namespace weylab;

namespace {

constexpr double kPi = std::numbers::pi;

SurfaceMesh tetrahedron()
{
    return SurfaceMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)},
        {Triangle{0, 2, 1}, Triangle{0, 1, 3}, Triangle{0, 3, 2}, Triangle{1, 2, 3}});
}

/// Exact integral of a linear function over a triangle: area times the vertex mean.
double linear_oracle(const SurfaceMesh& m, const Vec3& c)
{
    double total = 0;
    for (const auto& t : m.triangles()) {
        double mean = 0;
        for (auto v : t) mean += c.dot(m.vertices()[v]) / 3.0;
        total += m.triangle_area(t) * mean;
    }
    return total;
}

} // namespace

TEST(Mesh, IcosphereCounts)
{
    for (int level = 0; level <= 4; ++level) {
        const auto m = make_icosphere(level);
        const std::size_t faces = 20u << (2 * level);
        EXPECT_EQ(m.triangles().size(), faces);
        EXPECT_EQ(m.vertex_count(), faces / 2 + 2);
    }
    EXPECT_EQ(make_icosphere(4).vertex_count(), 2562u);
}

TEST(Mesh, IcosphereAreaConvergesFromBelowAtSecondOrder)
{
    double previous_error = 0;
    for (int level = 1; level <= 5; ++level) {
        const double error = 4 * kPi - make_icosphere(level).area();
        EXPECT_GT(error, 0.0);
        if (level > 1) {
            const double ratio = previous_error / error;
            EXPECT_GT(ratio, 3.5);
            EXPECT_LT(ratio, 4.5);
        }
        previous_error = error;
    }
    EXPECT_NEAR(make_icosphere(4).area(), 4 * kPi, 0.005 * 4 * kPi);
}

TEST(Mesh, NormalsAreUnitAndOutward)
{
    const auto m = make_icosphere(3);
    for (std::size_t i = 0; i < m.vertex_count(); ++i) {
        EXPECT_NEAR(m.normals()[i].norm(), 1.0, 1e-12);
        EXPECT_GT(m.normals()[i].dot(m.vertices()[i]), 0.99);
    }
    EXPECT_GT(m.signed_volume(), 0.0);
}

TEST(Mesh, LumpedQuadratureExactForLinearFunctions)
{
    const auto m = make_icosphere(2);
    EXPECT_NEAR(m.integrate_vertex_values([](std::size_t) { return 1.0; }), m.area(), 1e-12);
    for (const Vec3 c : {Vec3(1, 0, 0), Vec3(0.3, -2, 0.7)}) {
        const double lumped = m.integrate_vertex_values([&](std::size_t i) { return 1.5 + c.dot(m.vertices()[i]); });
        EXPECT_NEAR(lumped, 1.5 * m.area() + linear_oracle(m, c), 1e-12);
    }
}

TEST(Mesh, RejectsOpenSurface)
{
    EXPECT_THROW(SurfaceMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)},
                     {Triangle{0, 2, 1}, Triangle{0, 1, 3}, Triangle{0, 3, 2}, Triangle{0, 3, 2}}),
        MeshQualityError);
    EXPECT_THROW(SurfaceMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)},
                     {Triangle{0, 2, 1}, Triangle{0, 1, 3}, Triangle{0, 3, 2}, Triangle{1, 2, 9}}),
        MeshQualityError);
}

TEST(Mesh, RejectsInwardOrientation)
{
    EXPECT_NO_THROW(tetrahedron());
    EXPECT_THROW(SurfaceMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)},
                     {Triangle{0, 1, 2}, Triangle{0, 3, 1}, Triangle{0, 2, 3}, Triangle{1, 3, 2}}),
        MeshQualityError);
}

TEST(Mesh, OffRoundTrip)
{
    const auto m = make_icosphere(2);
    std::stringstream buf;
    write_off(buf, m);
    const auto back = read_off(buf);
    EXPECT_EQ(back.vertex_count(), m.vertex_count());
    EXPECT_EQ(back.content_hash(), m.content_hash());
}

TEST(Mesh, OffParsesCommentsAndSplitHeader)
{
    std::istringstream in("# a tetrahedron\nOFF\n4 4 6\n0 0 0\n1 0 0 # x\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n");
    EXPECT_EQ(read_off(in).vertex_count(), 4u);
    std::istringstream inline_counts("OFF 4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n");
    EXPECT_EQ(read_off(inline_counts).triangles().size(), 4u);
}

TEST(Mesh, OffFormatErrors)
{
    std::istringstream no_magic("PLY\n");
    EXPECT_THROW(read_off(no_magic), FormatError);
    std::istringstream quads("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n4 0 1 2 3\n");
    EXPECT_THROW(read_off(quads), FormatError);
    std::istringstream truncated("OFF\n4 4 6\n0 0 0\n1 0 0\n");
    EXPECT_THROW(read_off(truncated), FormatError);
    EXPECT_THROW(read_off(std::string("/nonexistent/mesh.off")), FormatError);
}

TEST(Mesh, ContentHashDetectsPerturbation)
{
    const auto m = make_icosphere(2);
    auto v = m.vertices();
    v[5] += Vec3(1e-3, 0, 0);
    const SurfaceMesh moved(v, m.triangles());
    EXPECT_NE(moved.content_hash(), m.content_hash());
}

TEST(Mesh, GammaTable)
{
    std::istringstream ok("2.0\n2.5\n# comment\n3.0\n2.1\n");
    const auto table = read_gamma_table(ok, 4);
    ASSERT_EQ(table.size(), 4u);
    const auto field = GammaField::per_vertex(table);
    const auto b = gamma_bounds(field, tetrahedron());
    EXPECT_DOUBLE_EQ(b.c0, 2.0);
    EXPECT_DOUBLE_EQ(b.c1, 3.0);
    std::istringstream short_table("2.0\n2.5\n");
    EXPECT_THROW(read_gamma_table(short_table, 4), FormatError);
    std::istringstream two_columns("2.0 1\n2.5\n2\n2\n");
    EXPECT_THROW(read_gamma_table(two_columns, 4), FormatError);
    EXPECT_THROW(gamma_bounds(GammaField::per_vertex({2.0, 2.0}), tetrahedron()), InvalidFieldError);
    EXPECT_THROW(gamma_bounds(GammaField::per_vertex({0.5, 2.0, 2.0, 2.0}), tetrahedron()), InvalidFieldError);
}
