#pragma once

#include "errors.hpp"
#include "lb_spectrum.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"
#include "surface.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace weylab {

// ---------------------------------------------------------------------------
// Boundary: analytic surface or mesh

/// The boundary surface a computation runs on.
class Boundary {
public:
    Boundary(AnalyticSurface surface) : value_(std::move(surface)) {}
    Boundary(SurfaceMesh mesh) : value_(std::move(mesh)) {}

    bool is_mesh() const { return std::holds_alternative<SurfaceMesh>(value_); }
    const SurfaceMesh& mesh() const { return std::get<SurfaceMesh>(value_); }
    const AnalyticSurface& analytic() const { return std::get<AnalyticSurface>(value_); }
    const SurfaceMesh* mesh_ptr() const { return std::get_if<SurfaceMesh>(&value_); }

    std::string name() const
    {
        if (is_mesh()) return "mesh(" + std::to_string(mesh().vertex_count()) + " vertices)";
        return analytic().name();
    }

    GammaBounds bounds(const GammaField& field) const
    {
        return is_mesh() ? gamma_bounds(field, mesh()) : gamma_bounds(field, analytic());
    }

    double area() const { return is_mesh() ? mesh().area() : analytic().area(); }

    /// Integral of (gamma_0^2 - 1) over the boundary.
    double gamma0_excess_integral(const GammaField& field) const
    {
        if (is_mesh()) {
            const SurfaceMesh& m = mesh();
            return m.integrate_vertex_values([&](std::size_t i) {
                const double g = gamma0_at_vertex(field, m, i);
                return g * g - 1.0;
            });
        }
        return analytic().integrate([&](const Vec3& x) {
            const double g = field.gamma0(x);
            return g * g - 1.0;
        });
    }

private:
    std::variant<AnalyticSurface, SurfaceMesh> value_;
};

// ---------------------------------------------------------------------------
// Constants of the positivity estimate

struct ConstantsCEps {
    double c0 = 0.0;      ///< min gamma_0
    double c1 = 0.0;      ///< max gamma_0
    double C = 0.0;       ///< 1 / c1^2
    double epsilon = 0.0; ///< (C / 2)(c0 - 1)^2
    double delta = 0.0;   ///< (c0 - 1) / 2

    static ConstantsCEps from_range(double c0, double c1)
    {
        if (!(c0 > 1.0) || !(c1 >= c0)) throw DomainError("constants need c1 >= c0 > 1");
        ConstantsCEps k;
        k.c0 = c0;
        k.c1 = c1;
        k.C = 1.0 / (c1 * c1);
        k.epsilon = 0.5 * k.C * (c0 - 1.0) * (c0 - 1.0);
        k.delta = 0.5 * (c0 - 1.0);
        return k;
    }

    static ConstantsCEps from_bounds(const GammaBounds& b) { return from_range(b.c0, b.c1); }
};

// ---------------------------------------------------------------------------
// Gamma moments <phi_i, gamma_0 phi_j>

/// Symmetric matrix of <phi_i, gamma_0 phi_j> over the leading `modes` modes.
///
/// Exact sphere bases: the real spherical harmonics are taken about the
/// field axis w, so gamma_0 (a function of <w, x> only) couples only equal
/// orders and each entry is a 1D Gauss-Legendre integral. Mesh bases use the
/// eigensolver mass with gamma_0 folded in symmetrically at the vertices.
inline Eigen::SparseMatrix<double> gamma_moments(const SpectralBasis& basis, const GammaField& field,
    std::size_t modes, const SurfaceMesh* mesh = nullptr)
{
    if (modes > basis.mode_count()) throw PreconditionError("gamma_moments: more modes than the basis holds");
    const auto n = static_cast<Eigen::Index>(modes);
    Eigen::SparseMatrix<double> g(n, n);

    if (field.kind() == GammaKind::constant) {
        const double c = field.gamma0(Vec3::Zero());
        g.setIdentity();
        g *= c;
        return g;
    }

    std::vector<Eigen::Triplet<double>> triplets;
    if (basis.source == SpectrumSource::exact_sphere) {
        if (!field.is_axial()) throw PreconditionError("exact sphere basis supports constant and affine gamma only");
        int max_degree = 0;
        std::map<int, std::vector<std::size_t>> by_order;
        for (std::size_t i = 0; i < modes; ++i) {
            by_order[basis.orders[i]].push_back(i);
            max_degree = std::max(max_degree, basis.degrees[i]);
        }
        const QuadratureRule rule = gauss_legendre(max_degree + 41);
        const std::size_t nq = rule.nodes.size();
        std::vector<double> weight(nq);
        for (std::size_t q = 0; q < nq; ++q) {
            weight[q] = 2.0 * std::numbers::pi * rule.weights[q] * field.gamma0(rule.nodes[q] * field.direction());
        }
        for (const auto& [order, members] : by_order) {
            const unsigned m = static_cast<unsigned>(std::abs(order));
            Eigen::MatrixXd values(static_cast<Eigen::Index>(members.size()), static_cast<Eigen::Index>(nq));
            for (std::size_t a = 0; a < members.size(); ++a) {
                const auto l = static_cast<unsigned>(basis.degrees[members[a]]);
                for (std::size_t q = 0; q < nq; ++q) {
                    values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(q))
                        = std::sph_legendre(l, m, std::acos(rule.nodes[q]));
                }
            }
            const Eigen::Map<const Eigen::VectorXd> w(weight.data(), static_cast<Eigen::Index>(nq));
            const Eigen::MatrixXd block = values * w.asDiagonal() * values.transpose();
            for (std::size_t a = 0; a < members.size(); ++a) {
                for (std::size_t b = 0; b < members.size(); ++b) {
                    triplets.emplace_back(static_cast<Eigen::Index>(members[a]), static_cast<Eigen::Index>(members[b]),
                        0.5 * (block(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))
                            + block(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a))));
                }
            }
        }
    } else {
        if (mesh == nullptr) throw PreconditionError("mesh basis requires the mesh to evaluate gamma moments");
        if (!basis.has_eigenvectors()) throw PreconditionError("mesh basis carries no eigenvectors");
        const FemPencil pencil = assemble_fem(*mesh);
        Eigen::VectorXd root(static_cast<Eigen::Index>(mesh->vertex_count()));
        for (std::size_t i = 0; i < mesh->vertex_count(); ++i) {
            root[static_cast<Eigen::Index>(i)] = std::sqrt(gamma0_at_vertex(field, *mesh, i));
        }
        const Eigen::MatrixXd phi = basis.eigenvectors.leftCols(n);
        const Eigen::MatrixXd weighted = root.asDiagonal() * (pencil.mass * (root.asDiagonal() * phi));
        const Eigen::MatrixXd dense = phi.transpose() * weighted;
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, j, 0.5 * (dense(i, j) + dense(j, i)));
        }
    }
    g.setFromTriplets(triplets.begin(), triplets.end());
    g.makeCompressed();
    return g;
}

// ---------------------------------------------------------------------------
// Truncated model of Q(h)

/// mode_cut selection: the first mode with lambda >= factor * lambda_star,
/// with lambda_star = (c1^2 - 1) / h^2, scaled by `multiplier` and extended
/// to close the degenerate cluster.
struct ModeCutPolicy {
    double factor = 2.0;
    double multiplier = 1.0;
    std::optional<std::size_t> fixed; ///< explicit override
};

inline double ellipticity_threshold(double c1, double h) { return (c1 * c1 - 1.0) / (h * h); }

namespace detail {

inline std::size_t close_cluster(const std::vector<double>& ev, std::size_t count)
{
    while (count < ev.size() && count > 0 && std::abs(ev[count] - ev[count - 1]) <= 1e-9 * (1.0 + ev[count - 1])) {
        ++count;
    }
    return count;
}

inline std::size_t required_modes_estimate(const SpectralBasis& basis, double lambda, double multiplier)
{
    if (basis.source == SpectrumSource::exact_sphere) {
        const int degree = sphere_degree_reaching(lambda);
        const double modes = static_cast<double>(degree + 1) * (degree + 1) * multiplier;
        const int closed = static_cast<int>(std::ceil(std::sqrt(modes)));
        return static_cast<std::size_t>(closed) * static_cast<std::size_t>(closed);
    }
    // Weyl estimate for a unit-area-normalized spectrum, padded.
    const double area = basis.mass.size() > 0 ? basis.mass.sum() : 4.0 * std::numbers::pi;
    return static_cast<std::size_t>(std::ceil(1.2 * multiplier * area * lambda / (4.0 * std::numbers::pi))) + 1;
}

} // namespace detail

inline std::size_t select_mode_cut(const SpectralBasis& basis, double c1, double h, const ModeCutPolicy& policy = {})
{
    const auto& ev = basis.eigenvalues;
    const double lambda_star = ellipticity_threshold(c1, h);
    if (basis.horizon < lambda_star) {
        throw InsufficientSpectrumError("trusted spectral horizon " + std::to_string(basis.horizon)
                + " is below the counting threshold " + std::to_string(lambda_star),
            detail::required_modes_estimate(basis, lambda_star, 1.0), lambda_star);
    }
    if (policy.fixed) {
        if (*policy.fixed > ev.size()) {
            throw InsufficientSpectrumError("mode_cut override exceeds the basis", *policy.fixed, lambda_star);
        }
        return *policy.fixed;
    }
    const double target = policy.factor * lambda_star;
    const auto it = std::lower_bound(ev.begin(), ev.end(), target);
    const std::size_t required_modes = detail::required_modes_estimate(basis, target, policy.multiplier);
    if (it == ev.end()) {
        throw InsufficientSpectrumError("spectral basis ends at " + std::to_string(basis.top_eigenvalue())
                + ", below the truncation target " + std::to_string(target) + "; about "
                + std::to_string(required_modes) + " modes are required",
            required_modes, target);
    }
    const auto base = static_cast<std::size_t>(it - ev.begin()) + 1;
    const auto scaled = static_cast<std::size_t>(std::ceil(policy.multiplier * static_cast<double>(base)));
    if (scaled > ev.size()) {
        throw InsufficientSpectrumError("spectral basis holds " + std::to_string(ev.size()) + " modes, "
                + std::to_string(scaled) + " are required",
            required_modes, target);
    }
    return detail::close_cluster(ev, scaled);
}

/// Finite symmetric model of Q(h): diag(sqrt(1 + h^2 lambda_i)) - G.
struct GalerkinOperator {
    double h = 0.0;
    std::size_t mode_cut = 0;
    Eigen::VectorXd multiplier;         ///< sqrt(1 + h^2 lambda_i)
    Eigen::SparseMatrix<double> moments; ///< <phi_i, gamma_0 phi_j>
    Eigen::SparseMatrix<double> matrix;
    std::vector<std::vector<Eigen::Index>> blocks; ///< decoupled index sets

    double asymmetry() const
    {
        const Eigen::SparseMatrix<double> t = matrix.transpose();
        return (matrix - t).norm();
    }
};

namespace detail {

/// Connected components of the sparsity graph of a square sparse matrix.
inline std::vector<std::vector<Eigen::Index>> sparsity_components(const Eigen::SparseMatrix<double>& m)
{
    const Eigen::Index n = m.rows();
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    auto find = [&](Eigen::Index i) {
        while (parent[static_cast<std::size_t>(i)] != i) {
            parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
            i = parent[static_cast<std::size_t>(i)];
        }
        return i;
    };
    for (Eigen::Index k = 0; k < m.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
            if (it.value() == 0.0) continue;
            const Eigen::Index a = find(it.row()), b = find(it.col());
            if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
        }
    }
    std::map<Eigen::Index, std::vector<Eigen::Index>> groups;
    for (Eigen::Index i = 0; i < n; ++i) groups[find(i)].push_back(i);
    std::vector<std::vector<Eigen::Index>> out;
    out.reserve(groups.size());
    for (auto& [root, members] : groups) out.push_back(std::move(members));
    return out;
}

} // namespace detail

/// Q(h) on the leading `mode_cut` modes, given precomputed moments covering them.
inline GalerkinOperator build_Q(const SpectralBasis& basis, const Eigen::SparseMatrix<double>& moments, double h,
    std::size_t mode_cut)
{
    if (!(h > 0.0)) throw PreconditionError("semiclassical parameter h must be positive");
    if (mode_cut == 0 || mode_cut > static_cast<std::size_t>(moments.rows()) || mode_cut > basis.mode_count()) {
        throw PreconditionError("mode_cut exceeds the available moments");
    }
    const auto n = static_cast<Eigen::Index>(mode_cut);
    GalerkinOperator op;
    op.h = h;
    op.mode_cut = mode_cut;
    op.multiplier.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        op.multiplier[i] = std::sqrt(1.0 + h * h * basis.eigenvalues[static_cast<std::size_t>(i)]);
    }
    op.moments = moments.topLeftCorner(n, n);
    Eigen::SparseMatrix<double> d(n, n);
    d.reserve(Eigen::VectorXi::Constant(n, 1));
    for (Eigen::Index i = 0; i < n; ++i) d.insert(i, i) = op.multiplier[i];
    op.matrix = d - op.moments;
    op.matrix.makeCompressed();
    op.blocks = detail::sparsity_components(op.moments);
    return op;
}

/// Q(h) with the mode cut chosen by `policy`.
inline GalerkinOperator build_Q(const SpectralBasis& basis, const GammaField& field, const GammaBounds& bounds,
    double h, const ModeCutPolicy& policy = {}, const SurfaceMesh* mesh = nullptr)
{
    const std::size_t cut = select_mode_cut(basis, bounds.c1, h, policy);
    return build_Q(basis, gamma_moments(basis, field, cut, mesh), h, cut);
}

/// Eigenpairs of one decoupled block.
struct BlockSpectrum {
    std::vector<Eigen::Index> indices;
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

inline std::vector<BlockSpectrum> block_spectra(const GalerkinOperator& op, bool with_vectors = false)
{
    std::vector<BlockSpectrum> out;
    out.reserve(op.blocks.size());
    for (const auto& idx : op.blocks) {
        const auto k = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd sub(k, k);
        for (Eigen::Index a = 0; a < k; ++a) {
            for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = op.matrix.coeff(idx[a], idx[b]);
        }
        BlockSpectrum bs;
        bs.indices = idx;
        if (k == 1) {
            bs.values = Eigen::VectorXd::Constant(1, sub(0, 0));
            if (with_vectors) bs.vectors = Eigen::MatrixXd::Identity(1, 1);
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
                0.5 * (sub + sub.transpose()), with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
            if (es.info() != Eigen::Success) throw SolverError("block eigensolve failed", 0.0);
            bs.values = es.eigenvalues();
            if (with_vectors) bs.vectors = es.eigenvectors();
        }
        out.push_back(std::move(bs));
    }
    return out;
}

inline std::vector<double> sorted_eigenvalues(const GalerkinOperator& op)
{
    std::vector<double> all;
    all.reserve(op.mode_cut);
    for (const auto& b : block_spectra(op)) all.insert(all.end(), b.values.data(), b.values.data() + b.values.size());
    std::sort(all.begin(), all.end());
    return all;
}

struct CountResult {
    std::size_t negative = 0;
    std::size_t borderline = 0; ///< eigenvalues with |mu| <= zero_tol
    double min_eigenvalue = 0.0;
};

inline constexpr double kDefaultZeroTol = 1e-12;

/// Number of eigenvalues below -zero_tol; those within zero_tol of zero are
/// reported separately and not counted.
inline CountResult count_negative(const GalerkinOperator& op, double zero_tol = kDefaultZeroTol)
{
    CountResult c;
    c.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (const auto& b : block_spectra(op)) {
        for (Eigen::Index i = 0; i < b.values.size(); ++i) {
            const double mu = b.values[i];
            c.min_eigenvalue = std::min(c.min_eigenvalue, mu);
            if (mu < -zero_tol) {
                ++c.negative;
            } else if (mu <= zero_tol) {
                ++c.borderline;
            }
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// Weyl prediction

/// (1/4pi) * integral of (gamma_0^2 - 1) over the boundary.
inline double weyl_coefficient(const Boundary& boundary, const GammaField& field)
{
    boundary.bounds(field);
    return boundary.gamma0_excess_integral(field) / (4.0 * std::numbers::pi);
}

inline double weyl_prediction(const Boundary& boundary, const GammaField& field, double r)
{
    if (!(r > 0.0)) throw PreconditionError("r must be positive");
    return weyl_coefficient(boundary, field) * r * r;
}

} // namespace weylab
