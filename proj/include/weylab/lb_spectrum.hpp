#pragma once

#include "errors.hpp"
#include "mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace weylab {

enum class SpectrumSource { exact_sphere, mesh_fem };

inline std::string to_string(SpectrumSource s)
{
    return s == SpectrumSource::exact_sphere ? "exact-sphere" : "mesh-fem";
}

inline constexpr std::uint64_t kDefaultSolverSeed = 0x5EED;

/// Eigenpairs of -Delta on the boundary, ascending with multiplicity.
///
/// Exact sphere bases record the spherical-harmonic labels (degree, order);
/// a negative order denotes the sine-type real harmonic of order |m|.
/// Mesh bases carry M-orthonormal eigenvectors in the vertex basis and the
/// lumped mass weights.
struct SpectralBasis {
    SpectrumSource source = SpectrumSource::exact_sphere;
    std::vector<double> eigenvalues;
    std::vector<int> degrees;
    std::vector<int> orders;
    Eigen::MatrixXd eigenvectors;
    Eigen::VectorXd mass;
    std::vector<double> residuals;
    double horizon = 0.0; ///< largest eigenvalue considered resolved
    double tolerance = 0.0;

    std::size_t mode_count() const { return eigenvalues.size(); }
    bool has_eigenvectors() const { return eigenvectors.size() > 0; }
    double top_eigenvalue() const { return eigenvalues.empty() ? 0.0 : eigenvalues.back(); }
};

/// Eigenvalues n(n+1) with multiplicity 2n+1 for n = 0..max_degree.
inline SpectralBasis exact_sphere_spectrum(int max_degree)
{
    if (max_degree < 0) throw PreconditionError("max_degree must be nonnegative");
    SpectralBasis basis;
    basis.source = SpectrumSource::exact_sphere;
    const std::size_t total = static_cast<std::size_t>(max_degree + 1) * static_cast<std::size_t>(max_degree + 1);
    basis.eigenvalues.reserve(total);
    basis.degrees.reserve(total);
    basis.orders.reserve(total);
    for (int n = 0; n <= max_degree; ++n) {
        for (int m = -n; m <= n; ++m) {
            basis.eigenvalues.push_back(static_cast<double>(n) * (n + 1));
            basis.degrees.push_back(n);
            basis.orders.push_back(m);
        }
    }
    basis.horizon = basis.top_eigenvalue();
    return basis;
}

/// Smallest sphere degree whose eigenvalue n(n+1) reaches `lambda`.
inline int sphere_degree_reaching(double lambda)
{
    int n = static_cast<int>(std::floor(std::sqrt(std::max(lambda, 0.0))));
    while (n > 0 && static_cast<double>(n - 1) * n >= lambda) --n;
    while (static_cast<double>(n) * (n + 1) < lambda) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// Cotangent finite elements

/// Stiffness K, the lumped mass (diagonal, trace = mesh area) and the mass
/// used by the eigensolver: the average of the consistent and lumped mass.
/// The two mass matrices bias eigenvalues in opposite directions; their
/// average cancels the leading discretization error.
struct FemPencil {
    Eigen::SparseMatrix<double> stiffness;
    Eigen::VectorXd lumped_mass;
    Eigen::SparseMatrix<double> mass;
};

inline constexpr double kMinTriangleArea = 1e-14;

inline FemPencil assemble_fem(const SurfaceMesh& mesh)
{
    const auto& v = mesh.vertices();
    const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
    std::vector<Eigen::Triplet<double>> stiffness, consistent;
    stiffness.reserve(mesh.triangles().size() * 12);
    consistent.reserve(mesh.triangles().size() * 9);
    Eigen::VectorXd lumped = Eigen::VectorXd::Zero(n);

    for (const auto& t : mesh.triangles()) {
        const double area = mesh.triangle_area(t);
        if (area < kMinTriangleArea) throw MeshQualityError("degenerate triangle (area < 1e-14)");
        for (int k = 0; k < 3; ++k) {
            const auto i = static_cast<Eigen::Index>(t[k]);
            const auto j = static_cast<Eigen::Index>(t[(k + 1) % 3]);
            const Vec3 a = v[t[k]] - v[t[(k + 2) % 3]];
            const Vec3 b = v[t[(k + 1) % 3]] - v[t[(k + 2) % 3]];
            // Half the cotangent of the angle opposite edge (i, j).
            const double w = 0.5 * a.dot(b) / a.cross(b).norm();
            stiffness.emplace_back(i, j, -w);
            stiffness.emplace_back(j, i, -w);
            stiffness.emplace_back(i, i, w);
            stiffness.emplace_back(j, j, w);
            lumped[i] += area / 3.0;
            consistent.emplace_back(i, i, area / 6.0);
            consistent.emplace_back(i, j, area / 12.0);
            consistent.emplace_back(j, i, area / 12.0);
        }
    }
    FemPencil pencil;
    pencil.stiffness.resize(n, n);
    pencil.stiffness.setFromTriplets(stiffness.begin(), stiffness.end());
    pencil.stiffness.makeCompressed();
    Eigen::SparseMatrix<double> mc(n, n);
    mc.setFromTriplets(consistent.begin(), consistent.end());
    Eigen::SparseMatrix<double> ml(n, n);
    ml.reserve(Eigen::VectorXi::Constant(n, 1));
    for (Eigen::Index i = 0; i < n; ++i) ml.insert(i, i) = lumped[i];
    pencil.mass = 0.5 * (mc + ml);
    pencil.mass.makeCompressed();
    pencil.lumped_mass = std::move(lumped);
    return pencil;
}

struct SolverOptions {
    double tolerance = 1e-8;
    std::uint64_t seed = kDefaultSolverSeed;
    /// Krylov subspace budget as a multiple of the requested count.
    double max_subspace_factor = 8.0;
};

/// Trusted horizon of a mesh basis: the eigenvalue at mode index
/// 0.05 * vertex_count (or the top computed one if fewer were requested).
inline double mesh_trusted_horizon(const std::vector<double>& eigenvalues, std::size_t vertex_count)
{
    if (eigenvalues.empty()) return 0.0;
    const auto trusted = std::max<std::size_t>(1, static_cast<std::size_t>(0.05 * static_cast<double>(vertex_count)));
    return eigenvalues[std::min(eigenvalues.size(), trusted) - 1];
}

namespace detail {

/// Residuals ||K v - lambda M v|| / ||v|| for the columns of `vectors`.
inline std::vector<double> pencil_residuals(const FemPencil& pencil, const Eigen::MatrixXd& vectors,
    const Eigen::VectorXd& values)
{
    const Eigen::MatrixXd kv = pencil.stiffness * vectors;
    const Eigen::MatrixXd mv = pencil.mass * vectors;
    std::vector<double> res(static_cast<std::size_t>(vectors.cols()));
    for (Eigen::Index i = 0; i < vectors.cols(); ++i) {
        res[static_cast<std::size_t>(i)] = (kv.col(i) - values[i] * mv.col(i)).norm() / vectors.col(i).norm();
    }
    return res;
}

/// M-orthonormalize the columns of w (CholeskyQR applied twice).
/// Returns false if the block is numerically rank deficient.
inline bool m_orthonormalize(Eigen::MatrixXd& w, const Eigen::SparseMatrix<double>& mass)
{
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::MatrixXd gram = w.transpose() * (mass * w);
        Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (gram + gram.transpose()));
        if (llt.info() != Eigen::Success) return false;
        const Eigen::MatrixXd l = llt.matrixL();
        if (l.diagonal().minCoeff() < 1e-10 * l.diagonal().maxCoeff()) return false;
        w = llt.matrixL().solve(w.transpose()).transpose();
    }
    return true;
}

} // namespace detail

/// Lowest `count` eigenpairs of K v = lambda M v.
///
/// Block Krylov iteration on the shift-inverted operator (K + sigma M)^-1 M
/// with full M-reorthogonalization and Rayleigh-Ritz on K; the start block is
/// drawn from a seeded generator. Small problems are solved densely.
inline SpectralBasis solve_lowest(const FemPencil& pencil, std::size_t count, const SolverOptions& options = {})
{
    const auto n = pencil.stiffness.rows();
    if (count == 0 || static_cast<Eigen::Index>(count) > n) {
        throw PreconditionError("requested eigenpair count must be in [1, vertex count]");
    }
    if (!(options.tolerance > 0.0 && options.tolerance <= 1e-4)) {
        throw PreconditionError("solver tolerance must lie in (0, 1e-4]");
    }
    const auto nev = static_cast<Eigen::Index>(count);

    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    std::vector<double> residuals;
    auto worst_scaled = [&]() {
        double w = 0.0;
        for (Eigen::Index i = 0; i < nev; ++i) {
            w = std::max(w, residuals[static_cast<std::size_t>(i)] / (1.0 + std::abs(values[i])));
        }
        return w;
    };

    if (n <= 800) {
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
            Eigen::MatrixXd(pencil.stiffness), Eigen::MatrixXd(pencil.mass));
        if (es.info() != Eigen::Success) throw SolverError("dense generalized eigensolve failed", 0.0);
        values = es.eigenvalues().head(nev);
        vectors = es.eigenvectors().leftCols(nev);
        residuals = detail::pencil_residuals(pencil, vectors, values);
    } else {
        const double shift = std::max(1e-8, 1e-3 * (pencil.stiffness.diagonal().sum() / pencil.mass.diagonal().sum()));
        const Eigen::SparseMatrix<double> shifted = pencil.stiffness + shift * pencil.mass;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(shifted);
        if (factor.info() != Eigen::Success) throw SolverError("factorization of the shifted pencil failed", 0.0);

        const Eigen::Index block = 8;
        const Eigen::Index max_dim = std::min<Eigen::Index>(
            n, std::max<Eigen::Index>(nev + 4 * block, static_cast<Eigen::Index>(options.max_subspace_factor * nev)));
        std::mt19937_64 rng(options.seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        auto random_block = [&](Eigen::Index cols) {
            Eigen::MatrixXd r(n, cols);
            for (Eigen::Index j = 0; j < cols; ++j) {
                for (Eigen::Index i = 0; i < n; ++i) r(i, j) = gauss(rng);
            }
            return r;
        };

        Eigen::MatrixXd basis(n, max_dim);
        Eigen::MatrixXd current = random_block(block);
        detail::m_orthonormalize(current, pencil.mass);
        basis.leftCols(block) = current;
        Eigen::Index dim = block;
        Eigen::Index next_check = std::min<Eigen::Index>(max_dim, std::max<Eigen::Index>(nev + 2 * block, 3 * nev / 2));
        double worst = std::numeric_limits<double>::infinity();
        bool converged = false;

        while (true) {
            if (dim >= next_check || dim == max_dim) {
                const auto v = basis.leftCols(dim);
                const Eigen::MatrixXd h = v.transpose() * (pencil.stiffness * v);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (h + h.transpose()));
                values = es.eigenvalues().head(nev);
                vectors = v * es.eigenvectors().leftCols(nev);
                residuals = detail::pencil_residuals(pencil, vectors, values);
                worst = worst_scaled();
                if (worst <= options.tolerance) {
                    converged = true;
                    break;
                }
                if (dim == max_dim) break;
                next_check = std::min<Eigen::Index>(max_dim, dim + std::max<Eigen::Index>(2 * block, nev / 2));
            }
            const Eigen::Index take = std::min(block, max_dim - dim);
            Eigen::MatrixXd w = factor.solve(pencil.mass * current);
            for (int pass = 0; pass < 2; ++pass) {
                const auto v = basis.leftCols(dim);
                w -= v * (v.transpose() * (pencil.mass * w));
            }
            if (!detail::m_orthonormalize(w, pencil.mass)) {
                // Krylov breakdown: continue with a fresh random block.
                w = random_block(block);
                for (int pass = 0; pass < 2; ++pass) {
                    const auto v = basis.leftCols(dim);
                    w -= v * (v.transpose() * (pencil.mass * w));
                }
                if (!detail::m_orthonormalize(w, pencil.mass)) break;
            }
            current = w;
            basis.middleCols(dim, take) = w.leftCols(take);
            dim += take;
        }
        if (!converged) throw SolverError("block Krylov eigensolver did not converge", worst);
    }

    SpectralBasis basis;
    basis.source = SpectrumSource::mesh_fem;
    basis.eigenvalues.assign(values.data(), values.data() + values.size());
    // The constant mode is exactly harmonic; clear roundoff below zero.
    for (double& l : basis.eigenvalues) l = std::max(l, 0.0);
    basis.eigenvectors = std::move(vectors);
    for (Eigen::Index j = 0; j < basis.eigenvectors.cols(); ++j) {
        // Deterministic sign: largest-magnitude entry positive.
        Eigen::Index arg = 0;
        basis.eigenvectors.col(j).cwiseAbs().maxCoeff(&arg);
        if (basis.eigenvectors(arg, j) < 0.0) basis.eigenvectors.col(j) *= -1.0;
    }
    basis.mass = pencil.lumped_mass;
    basis.residuals = std::move(residuals);
    basis.tolerance = options.tolerance;
    basis.horizon = mesh_trusted_horizon(basis.eigenvalues, static_cast<std::size_t>(n));
    return basis;
}

inline SpectralBasis solve_lowest(const SurfaceMesh& mesh, std::size_t count, const SolverOptions& options = {})
{
    return solve_lowest(assemble_fem(mesh), count, options);
}

} // namespace weylab
