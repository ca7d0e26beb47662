#pragma once

#include "surface.hpp"
#include "symbols.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>

namespace weylab {

inline constexpr std::uint64_t kDefaultSymbolSeed = 42;
inline constexpr double kSymbolResidualGate = 1e-8;

struct IdentityResult {
    double max_residual = 0.0;
    std::size_t evaluations = 0;

    void record(double residual)
    {
        // NaN must never pass as a small residual.
        max_residual = std::isnan(residual) ? std::numeric_limits<double>::infinity()
                                            : std::max(max_residual, residual);
        ++evaluations;
    }
};

struct SymbolSuiteReport {
    std::string surface;
    std::uint64_t seed = kDefaultSymbolSeed;
    std::size_t sample_count = 0;
    std::map<std::string, IdentityResult> identities;

    bool passes(double gate = kSymbolResidualGate) const
    {
        return std::all_of(identities.begin(), identities.end(),
            [gate](const auto& kv) { return kv.second.max_residual < gate; });
    }

    std::vector<std::string> failing(double gate = kSymbolResidualGate) const
    {
        std::vector<std::string> names;
        for (const auto& [name, result] : identities) {
            if (!(result.max_residual < gate)) names.push_back(name);
        }
        return names;
    }
};

inline nlohmann::json to_json(const SymbolSuiteReport& report)
{
    nlohmann::json j;
    j["surface"] = report.surface;
    j["seed"] = report.seed;
    j["sample_count"] = report.sample_count;
    nlohmann::json ids = nlohmann::json::object();
    for (const auto& [name, r] : report.identities) {
        ids[name] = {{"max_residual", r.max_residual}, {"evaluations", r.evaluations}};
    }
    j["identities"] = ids;
    j["gate"] = kSymbolResidualGate;
    j["pass"] = report.passes();
    return j;
}

namespace detail {

/// Covector transported from chart `from` at x to chart `to` at y = to^-1(from(x)):
/// xi~_j = sum_k xi_k dx_k/dy_j, with the transition Jacobian by central differences.
inline Vec2 transport_covector(const Chart& from, const Chart& to, const Vec2& y, const Vec2& xi)
{
    Eigen::Matrix2d jac;
    for (int j = 0; j < 2; ++j) {
        Vec2 e = Vec2::Zero();
        e[j] = kFiniteDifferenceStep;
        const auto plus = from.inverse(to.point(y + e));
        const auto minus = from.inverse(to.point(y - e));
        if (!plus || !minus) return Vec2::Constant(std::numeric_limits<double>::quiet_NaN());
        jac.col(j) = (*plus - *minus) / (2.0 * kFiniteDifferenceStep);
    }
    return jac.transpose() * xi;
}

} // namespace detail

/// Evaluates every pointwise symbol identity at `sample_count` seeded random
/// cotangent samples on the surface and records the largest residual of each.
inline SymbolSuiteReport run_symbol_suite(const AnalyticSurface& surface, std::size_t sample_count,
    std::uint64_t seed = kDefaultSymbolSeed)
{
    if (sample_count == 0) throw PreconditionError("symbol suite needs at least one sample");
    SymbolSuiteReport report;
    report.surface = surface.name();
    report.seed = seed;
    report.sample_count = sample_count;
    auto& ids = report.identities;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    constexpr double pi = std::numbers::pi;

    for (std::size_t n = 0; n < sample_count; ++n) {
        const std::size_t c = rng() % surface.charts().size();
        const Chart& chart = surface.charts()[c];
        const Vec2 x(uniform(0.15, pi - 0.15), uniform(0.05, 2.0 * pi - 0.05));
        Vec2 xi(uniform(-4.0, 4.0), uniform(-4.0, 4.0));
        if (xi.norm() < 1e-3) xi = Vec2(1.0, 0.5);
        const double h = uniform(0.01, 1.0);
        const double t = uniform(-h * h, h * h);
        const Complex z = spectral_parameter(t);
        const double g0 = uniform(1.05, 5.0);

        const CotangentSample s = make_sample(chart, x, xi);
        const Vec3& nu = s.nu;
        const Vec3& b = s.beta;
        const double r0 = s.r0;
        const Mat3 bmat = symbol_B(b);

        ids["nu_beta_orthogonality"].record(std::abs(nu.dot(b)));
        ids["normal_tangent_orthogonality"].record(
            std::max(std::abs(nu.dot(s.tangents.col(0))), std::abs(nu.dot(s.tangents.col(1)))));
        ids["r0_cometric"].record(std::abs(r0 - cometric_form(s.metric, xi)) / (1.0 + r0));
        ids["beta_homogeneity"].record((make_sample(chart, x, 2.0 * xi).beta - 2.0 * b).norm());

        // Eigenstructure of B.
        const auto pairs = eigenstructure_B(nu, b);
        double eig = 0.0;
        for (const auto& p : pairs) eig = std::max(eig, (bmat * p.vector - p.value * p.vector).norm());
        Eigen::SelfAdjointEigenSolver<Mat3> es(bmat);
        const Vec3 expected(0.0, 0.0, r0);
        eig = std::max(eig, (es.eigenvalues() - expected).cwiseAbs().maxCoeff() / (1.0 + r0));
        ids["B_eigenstructure"].record(eig);
        ids["B_trace"].record(std::abs(bmat.trace() - r0));

        // Orthogonal frame and the global diagonalisation.
        const Mat3 u = build_U(nu, b);
        ids["U_orthogonality"].record((u.transpose() * u - Mat3::Identity()).norm());
        ids["U_diagonalizes_B"].record((u.transpose() * bmat * u - Vec3(0.0, 0.0, r0).asDiagonal().toDenseMatrix())
                                           .norm()
            / (1.0 + r0));
        ids["U_scale_invariance"].record((build_U(nu, 2.0 * b) - u).norm());
        const Mat3 p1 = reduced_symbol_p1(b, h, g0);
        ids["diagonalization_p1"].record(
            (u.transpose() * p1 * u - diagonalized_p1(r0, h, g0).asDiagonal().toDenseMatrix()).norm());

        // rho branch.
        const Complex r = rho(z, r0);
        ids["rho_square"].record(std::abs(r * r - (z * z - r0)) / (1.0 + r0));
        ids["rho_upper_branch"].record(r.imag() > 0.0 ? 0.0 : 1.0);
        ids["rho_branch_stability"].record(std::max(0.0, std::min(1.0, 0.5 * std::sqrt(1.0 + r0)) - r.imag()));

        // Boundary symbols.
        const CMat3 m = principal_m(b, z);
        ids["m_complex_symmetry"].record((m - m.transpose()).norm());
        const CMat3 m_mi = principal_m(b, -kI);
        ids["minus_m_at_minus_i"].record((-m_mi - minus_m_at_minus_i(b).cast<Complex>()).norm());
        ids["m1_equals_minus_m"].record((principal_m1(b, -kI) + m_mi).norm());

        // Transport systems at random tangential data.
        const Vec3 t1 = u.col(1), t2 = u.col(2);
        const CVec3 g = Complex(uniform(-1, 1), uniform(-1, 1)) * t1.cast<Complex>()
            + Complex(uniform(-1, 1), uniform(-1, 1)) * t2.cast<Complex>();
        for (auto side : {TransportSide::electric, TransportSide::magnetic}) {
            const auto tp = transport_principal(nu, b, z, g, side);
            const std::string tag = side == TransportSide::electric ? "transport_E" : "transport_H";
            ids[tag + "_boundary"].record(tp.boundary_residual);
            ids[tag + "_system"].record(tp.system_residual / (1.0 + r0));
            ids[tag + "_closed_form"].record(tp.closed_form_residual / (1.0 + r0));
        }
        double from_transport_e = 0.0, from_transport_h = 0.0;
        for (const Vec3& tv : {t1, t2}) {
            const CVec3 f = tv.cast<Complex>();
            from_transport_e = std::max(from_transport_e,
                (transport_symbol_action(nu, b, z, f, TransportSide::electric) - m * f).norm());
            from_transport_h = std::max(from_transport_h,
                (transport_symbol_action(nu, b, -kI, f, TransportSide::magnetic) - minus_m_at_minus_i(b).cast<Complex>() * f)
                    .norm());
        }
        ids["m_from_transport_E"].record(from_transport_e / (1.0 + r0));
        ids["m1_from_transport_H"].record(from_transport_h / (1.0 + r0));

        // Chart invariance of beta where the other chart also covers the point.
        const Vec3 p = chart.point(x);
        for (std::size_t o = 0; o < surface.charts().size(); ++o) {
            if (o == c) continue;
            const Chart& other = surface.charts()[o];
            const auto y = other.inverse(p);
            if (!y) continue;
            const ParamRect& d = other.domain();
            if ((*y)[1] < d.v_min + 1e-3 || (*y)[1] > d.v_max - 1e-3) continue;
            const Vec2 xi_other = detail::transport_covector(chart, other, *y, xi);
            const CotangentSample so = make_sample(other, *y, xi_other);
            ids["chart_invariance_beta"].record((so.beta - b).norm() / (1.0 + b.norm()));
            ids["chart_invariance_r0"].record(std::abs(so.r0 - r0) / (1.0 + r0));
        }
    }
    return report;
}

} // namespace weylab
