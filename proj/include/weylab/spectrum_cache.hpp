#pragma once

#include "lb_spectrum.hpp"
#include "mesh.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

namespace weylab {

inline constexpr std::uint32_t kCacheFormatVersion = 1;
inline constexpr std::array<char, 4> kCacheMagic{'W', 'L', 'B', '1'};

struct CacheKey {
    std::uint64_t mesh_hash = 0;
    std::size_t count = 0;
    double tolerance = 0.0;
    std::uint32_t version = kCacheFormatVersion;

    std::string stem() const
    {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%016llx-n%zu-t%.3e-v%u", static_cast<unsigned long long>(mesh_hash), count,
            tolerance, version);
        return buf;
    }
};

inline CacheKey cache_key(const SurfaceMesh& mesh, std::size_t count, double tolerance)
{
    return {mesh.content_hash(), count, tolerance, kCacheFormatVersion};
}

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v)
{
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

inline bool get_u64(std::istream& in, std::uint64_t& v)
{
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return true;
}

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline bool get_f64(std::istream& in, double& v)
{
    std::uint64_t u = 0;
    if (!get_u64(in, u)) return false;
    v = std::bit_cast<double>(u);
    return true;
}

/// Writes through a uniquely named sibling temp file, then renames over `path`.
inline void atomic_write(const std::filesystem::path& path, const std::string& bytes)
{
    std::random_device rd;
    const auto tmp = path.parent_path() / (path.filename().string() + ".tmp" + std::to_string(rd()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write cache file " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error("short write to cache file " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace detail

/// On-disk store of mesh spectra. Layout (little-endian): magic "WLB1", u64 format
/// version, u64 mode count, u64 vertex count, f64 tolerance, f64 horizon, then
/// eigenvalues, residuals, lumped mass and column-major eigenvectors as f64.
class SpectrumCache {
public:
    explicit SpectrumCache(std::filesystem::path directory) : dir_(std::move(directory)) {}

    const std::filesystem::path& directory() const { return dir_; }
    std::filesystem::path binary_path(const CacheKey& key) const { return dir_ / (key.stem() + ".wlb"); }
    std::filesystem::path sidecar_path(const CacheKey& key) const { return dir_ / (key.stem() + ".json"); }

    void store(const CacheKey& key, const SpectralBasis& basis) const
    {
        if (basis.source != SpectrumSource::mesh_fem) throw PreconditionError("only mesh spectra are cached");
        std::filesystem::create_directories(dir_);
        const auto count = static_cast<std::uint64_t>(basis.eigenvalues.size());
        const auto rows = static_cast<std::uint64_t>(basis.eigenvectors.rows());
        std::ostringstream out(std::ios::binary);
        out.write(kCacheMagic.data(), 4);
        detail::put_u64(out, key.version);
        detail::put_u64(out, count);
        detail::put_u64(out, rows);
        detail::put_f64(out, basis.tolerance);
        detail::put_f64(out, basis.horizon);
        for (double v : basis.eigenvalues) detail::put_f64(out, v);
        for (std::size_t i = 0; i < count; ++i) detail::put_f64(out, i < basis.residuals.size() ? basis.residuals[i] : 0.0);
        for (Eigen::Index i = 0; i < basis.mass.size(); ++i) detail::put_f64(out, basis.mass[i]);
        for (Eigen::Index j = 0; j < basis.eigenvectors.cols(); ++j) {
            for (Eigen::Index i = 0; i < basis.eigenvectors.rows(); ++i) detail::put_f64(out, basis.eigenvectors(i, j));
        }
        detail::atomic_write(binary_path(key), out.str());

        nlohmann::json meta;
        char hash[24];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(key.mesh_hash));
        meta["mesh_hash"] = hash;
        meta["count"] = count;
        meta["tolerance"] = basis.tolerance;
        meta["source"] = to_string(basis.source);
        meta["format_version"] = key.version;
        meta["vertex_count"] = rows;
        detail::atomic_write(sidecar_path(key), meta.dump(2) + "\n");
    }

    /// Empty on a missing, truncated or version-mismatched entry.
    std::optional<SpectralBasis> load(const CacheKey& key) const
    {
        std::ifstream sidecar(sidecar_path(key));
        std::ifstream in(binary_path(key), std::ios::binary);
        if (!in || !sidecar) return std::nullopt;
        try {
            const auto meta = nlohmann::json::parse(sidecar);
            if (meta.value("format_version", 0u) != key.version || key.version != kCacheFormatVersion) {
                return std::nullopt;
            }
        } catch (const nlohmann::json::exception&) {
            return std::nullopt;
        }
        std::array<char, 4> magic{};
        if (!in.read(magic.data(), 4) || magic != kCacheMagic) return std::nullopt;
        std::uint64_t version = 0, count = 0, rows = 0;
        if (!detail::get_u64(in, version) || version != kCacheFormatVersion) return std::nullopt;
        if (!detail::get_u64(in, count) || !detail::get_u64(in, rows) || count != key.count) return std::nullopt;
        SpectralBasis basis;
        basis.source = SpectrumSource::mesh_fem;
        if (!detail::get_f64(in, basis.tolerance) || !detail::get_f64(in, basis.horizon)) return std::nullopt;
        if (basis.tolerance != key.tolerance) return std::nullopt;
        basis.eigenvalues.resize(count);
        basis.residuals.resize(count);
        basis.mass.resize(static_cast<Eigen::Index>(rows));
        basis.eigenvectors.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(count));
        for (auto& v : basis.eigenvalues) {
            if (!detail::get_f64(in, v)) return std::nullopt;
        }
        for (auto& v : basis.residuals) {
            if (!detail::get_f64(in, v)) return std::nullopt;
        }
        for (Eigen::Index i = 0; i < basis.mass.size(); ++i) {
            if (!detail::get_f64(in, basis.mass[i])) return std::nullopt;
        }
        for (Eigen::Index j = 0; j < basis.eigenvectors.cols(); ++j) {
            for (Eigen::Index i = 0; i < basis.eigenvectors.rows(); ++i) {
                if (!detail::get_f64(in, basis.eigenvectors(i, j))) return std::nullopt;
            }
        }
        return basis;
    }

private:
    std::filesystem::path dir_;
};

} // namespace weylab
