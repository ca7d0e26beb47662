#include <weylab/spectrum_cache.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace weylab;

namespace {

class CacheTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = std::filesystem::temp_directory_path()
            / ("weylab-cache-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        std::filesystem::remove_all(dir_);
    }
    void TearDown() override { std::filesystem::remove_all(dir_); }

    std::filesystem::path dir_;
};

} // namespace

TEST_F(CacheTest, StoreThenLoadIsBitExact)
{
    const auto mesh = make_icosphere(2);
    const auto basis = solve_lowest(mesh, 16);
    const SpectrumCache cache(dir_);
    const auto key = cache_key(mesh, 16, basis.tolerance);
    cache.store(key, basis);
    const auto loaded = cache.load(key);
    ASSERT_TRUE(loaded.has_value());
    EXPECT_EQ(loaded->eigenvalues, basis.eigenvalues);
    EXPECT_EQ(loaded->residuals, basis.residuals);
    EXPECT_EQ(loaded->horizon, basis.horizon);
    EXPECT_EQ((loaded->eigenvectors - basis.eigenvectors).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((loaded->mass - basis.mass).cwiseAbs().maxCoeff(), 0.0);

    std::ifstream bin(cache.binary_path(key), std::ios::binary);
    char magic[4];
    bin.read(magic, 4);
    EXPECT_EQ(std::string(magic, 4), "WLB1");
    std::ifstream side(cache.sidecar_path(key));
    const auto meta = nlohmann::json::parse(side);
    EXPECT_EQ(meta["source"], "mesh-fem");
    EXPECT_EQ(meta["count"], 16);
}

TEST_F(CacheTest, AbsentKeyIsAMiss)
{
    const SpectrumCache cache(dir_);
    EXPECT_FALSE(cache.load(cache_key(make_icosphere(1), 4, 1e-8)).has_value());
}

TEST_F(CacheTest, PerturbedMeshMisses)
{
    const auto mesh = make_icosphere(2);
    const SpectrumCache cache(dir_);
    cache.store(cache_key(mesh, 8, 1e-8), solve_lowest(mesh, 8));
    auto v = mesh.vertices();
    v[3] += Vec3(0, 1e-3, 0);
    const SurfaceMesh moved(v, mesh.triangles());
    EXPECT_FALSE(cache.load(cache_key(moved, 8, 1e-8)).has_value());
    EXPECT_FALSE(cache.load(cache_key(mesh, 9, 1e-8)).has_value());
    EXPECT_FALSE(cache.load(cache_key(mesh, 8, 1e-9)).has_value());
}

TEST_F(CacheTest, VersionMismatchMisses)
{
    const auto mesh = make_icosphere(1);
    const SpectrumCache cache(dir_);
    const auto key = cache_key(mesh, 4, 1e-8);
    cache.store(key, solve_lowest(mesh, 4));
    // Rewrite the header version in place; the sidecar still claims the current version.
    {
        std::fstream f(cache.binary_path(key), std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(4);
        const char bumped[8] = {2, 0, 0, 0, 0, 0, 0, 0};
        f.write(bumped, 8);
    }
    EXPECT_FALSE(cache.load(key).has_value());
}

TEST_F(CacheTest, TruncatedFileMisses)
{
    const auto mesh = make_icosphere(1);
    const SpectrumCache cache(dir_);
    const auto key = cache_key(mesh, 4, 1e-8);
    cache.store(key, solve_lowest(mesh, 4));
    std::filesystem::resize_file(cache.binary_path(key), 40);
    EXPECT_FALSE(cache.load(key).has_value());
}

TEST_F(CacheTest, NoTemporaryFilesRemain)
{
    const auto mesh = make_icosphere(1);
    const SpectrumCache cache(dir_);
    cache.store(cache_key(mesh, 4, 1e-8), solve_lowest(mesh, 4));
    for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
        EXPECT_EQ(entry.path().string().find(".tmp"), std::string::npos);
    }
}

TEST_F(CacheTest, ExactSpectraAreNotCached)
{
    const SpectrumCache cache(dir_);
    EXPECT_THROW(cache.store(CacheKey{}, exact_sphere_spectrum(2)), PreconditionError);
}
