#pragma once

#include "semiclassical.hpp"

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace weylab {

inline constexpr const char* kVersion = "0.1.0";

struct ScanOptions {
    std::vector<double> r_grid;
    ModeCutPolicy policy;
    double zero_tol = kDefaultZeroTol;
    bool check_stability = true;
    double stability_multiplier = 1.5;
};

struct ScanRow {
    double r = 0.0;
    double h = 0.0;
    std::size_t n_scalar = 0;
    std::size_t n_system = 0;
    double weyl = 0.0;
    std::size_t borderline = 0;
    std::size_t mode_cut = 0;
    std::size_t stability_mode_cut = 0;
    std::size_t stability_n_scalar = 0;
};

struct PowerFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    std::size_t points = 0;
};

/// Counting function samples N(r), the Weyl prediction and fit diagnostics.
struct CountReport {
    std::vector<ScanRow> rows;
    double weyl_coefficient = 0.0;
    double fitted_coefficient = 0.0; ///< least-squares a in N_scalar ~ a r^2 over the grid
    PowerFit top_half_fit;           ///< log N_scalar vs log r over the top half of the grid
    bool monotone = true;
    bool stability_checked = false;
    bool truncation_stable = true;
    std::size_t max_stability_delta = 0;
    bool exponent_gate_applicable = false;
    bool exponent_gate_pass = true;
    std::string supported_count; ///< "scalar" or "system", whichever is closer to W at the top r

    bool gates_pass() const { return monotone && truncation_stable && exponent_gate_pass; }
};

inline constexpr double kExponentLow = 1.9;
inline constexpr double kExponentHigh = 2.1;

/// Least-squares slope/intercept of log y against log x.
inline PowerFit fit_power_law(std::span<const double> x, std::span<const double> y)
{
    PowerFit fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(y[i] > 0.0) || !(x[i] > 0.0)) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    fit.points = n;
    if (n < 2) return fit;
    const double dn = static_cast<double>(n);
    fit.exponent = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    fit.prefactor = std::exp((sy - fit.exponent * sx) / dn);
    return fit;
}

/// Least-squares a in y ~ a x^2.
inline double fit_quadratic_coefficient(std::span<const double> x, std::span<const double> y)
{
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += y[i] * x[i] * x[i];
        den += x[i] * x[i] * x[i] * x[i];
    }
    return den > 0.0 ? num / den : 0.0;
}

/// Counts negative eigenvalues of Q(1/r) along the grid and evaluates every
/// report diagnostic. Truncation instability is flagged, not thrown.
inline CountReport scan(const Boundary& boundary, const GammaField& field, const SpectralBasis& basis,
    const ScanOptions& options)
{
    const auto& grid = options.r_grid;
    if (grid.empty()) throw PreconditionError("scan needs a nonempty r grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw PreconditionError("r grid values must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw PreconditionError("r grid must be strictly ascending");
    }
    const GammaBounds bounds = boundary.bounds(field);
    const SurfaceMesh* mesh = boundary.mesh_ptr();
    if (basis.source == SpectrumSource::mesh_fem && mesh == nullptr) {
        throw PreconditionError("a mesh basis needs a mesh boundary");
    }

    CountReport report;
    report.weyl_coefficient = weyl_coefficient(boundary, field);

    ModeCutPolicy stability_policy = options.policy;
    stability_policy.multiplier *= options.stability_multiplier;
    std::vector<std::size_t> cuts, stability_cuts;
    std::size_t widest = 0;
    for (double r : grid) {
        cuts.push_back(select_mode_cut(basis, bounds.c1, 1.0 / r, options.policy));
        widest = std::max(widest, cuts.back());
        if (options.check_stability && !options.policy.fixed) {
            stability_cuts.push_back(select_mode_cut(basis, bounds.c1, 1.0 / r, stability_policy));
            widest = std::max(widest, stability_cuts.back());
        }
    }
    const Eigen::SparseMatrix<double> moments = gamma_moments(basis, field, widest, mesh);

    for (std::size_t i = 0; i < grid.size(); ++i) {
        ScanRow row;
        row.r = grid[i];
        row.h = 1.0 / grid[i];
        row.mode_cut = cuts[i];
        const CountResult c = count_negative(build_Q(basis, moments, row.h, row.mode_cut), options.zero_tol);
        row.n_scalar = c.negative;
        row.n_system = 2 * c.negative;
        row.borderline = c.borderline;
        row.weyl = report.weyl_coefficient * row.r * row.r;
        if (!stability_cuts.empty()) {
            row.stability_mode_cut = stability_cuts[i];
            row.stability_n_scalar
                = count_negative(build_Q(basis, moments, row.h, row.stability_mode_cut), options.zero_tol).negative;
            const std::size_t delta = row.stability_n_scalar > row.n_scalar ? row.stability_n_scalar - row.n_scalar
                                                                             : row.n_scalar - row.stability_n_scalar;
            report.max_stability_delta = std::max(report.max_stability_delta, delta);
        }
        report.rows.push_back(row);
    }
    report.stability_checked = !stability_cuts.empty();
    report.truncation_stable = report.max_stability_delta == 0;

    std::vector<double> rs, ns;
    for (const auto& row : report.rows) {
        rs.push_back(row.r);
        ns.push_back(static_cast<double>(row.n_scalar));
    }
    for (std::size_t i = 1; i < ns.size(); ++i) {
        if (ns[i] < ns[i - 1]) report.monotone = false;
    }
    report.fitted_coefficient = fit_quadratic_coefficient(rs, ns);
    const std::size_t top = (rs.size() + 1) / 2;
    const std::size_t first = rs.size() - top;
    report.top_half_fit = fit_power_law(std::span(rs).subspan(first), std::span(ns).subspan(first));
    report.exponent_gate_applicable = rs.size() >= 2 && rs.back() / rs.front() >= 3.0;
    if (report.exponent_gate_applicable) {
        report.exponent_gate_pass = report.top_half_fit.points >= 2 && report.top_half_fit.exponent >= kExponentLow
            && report.top_half_fit.exponent <= kExponentHigh;
    }
    const ScanRow& last = report.rows.back();
    const double w = std::max(last.weyl, std::numeric_limits<double>::min());
    report.supported_count = std::abs(static_cast<double>(last.n_scalar) / w - 1.0)
            <= std::abs(static_cast<double>(last.n_system) / w - 1.0)
        ? "scalar"
        : "system";
    return report;
}

// ---------------------------------------------------------------------------
// Eigenvalue branch monotonicity

struct BranchSlope {
    double h = 0.0;
    double mu = 0.0;
    double slope = 0.0; ///< h * d mu / dh by central differences
};

struct MonotonicityReport {
    ConstantsCEps constants;
    std::vector<BranchSlope> slopes;
    std::size_t skipped = 0;       ///< branches whose overlap match was ambiguous
    std::size_t nonpositive = 0;   ///< slopes <= 0
    std::size_t below_bound = 0;   ///< slopes < epsilon / 4
    double min_slope = std::numeric_limits<double>::infinity();
    double max_slope = 0.0;        ///< empirical C0*

    bool passes() const { return nonpositive == 0; }
};

inline constexpr double kBranchOverlap = 0.8;

/// Tracks every eigenvalue branch of Q(h) inside [-delta, delta] at each h by
/// eigenvector overlap across h(1 -+ rel_step) and records h d mu / dh.
inline MonotonicityReport monotonicity_probe(const Boundary& boundary, const GammaField& field,
    const SpectralBasis& basis, std::span<const double> h_values, const ModeCutPolicy& policy = {},
    double rel_step = 1e-4)
{
    const GammaBounds bounds = boundary.bounds(field);
    MonotonicityReport report;
    report.constants = ConstantsCEps::from_bounds(bounds);
    const double delta = report.constants.delta;
    std::vector<std::size_t> cuts;
    std::size_t widest = 0;
    for (double h : h_values) {
        // The widened h - dh sits slightly deeper; one cut serves all three.
        cuts.push_back(select_mode_cut(basis, bounds.c1, h * (1.0 - rel_step), policy));
        widest = std::max(widest, cuts.back());
    }
    const Eigen::SparseMatrix<double> moments = gamma_moments(basis, field, widest, boundary.mesh_ptr());

    for (std::size_t k = 0; k < h_values.size(); ++k) {
        const double h = h_values[k];
        const double dh = rel_step * h;
        const auto centre = block_spectra(build_Q(basis, moments, h, cuts[k]), true);
        const auto lower = block_spectra(build_Q(basis, moments, h - dh, cuts[k]), true);
        const auto upper = block_spectra(build_Q(basis, moments, h + dh, cuts[k]), true);
        for (std::size_t b = 0; b < centre.size(); ++b) {
            for (Eigen::Index i = 0; i < centre[b].values.size(); ++i) {
                const double mu = centre[b].values[i];
                if (std::abs(mu) > delta) continue;
                const Eigen::VectorXd v = centre[b].vectors.col(i);
                auto match = [&](const BlockSpectrum& other, double& value) {
                    const Eigen::VectorXd overlaps = (other.vectors.transpose() * v).cwiseAbs();
                    Eigen::Index best = 0;
                    const double o = overlaps.maxCoeff(&best);
                    value = other.values[best];
                    return o > kBranchOverlap;
                };
                double mu_minus = 0.0, mu_plus = 0.0;
                if (!match(lower[b], mu_minus) || !match(upper[b], mu_plus)) {
                    ++report.skipped;
                    continue;
                }
                const double slope = h * (mu_plus - mu_minus) / (2.0 * dh);
                report.slopes.push_back({h, mu, slope});
                report.min_slope = std::min(report.min_slope, slope);
                report.max_slope = std::max(report.max_slope, slope);
                if (!(slope > 0.0)) ++report.nonpositive;
                if (slope < 0.25 * report.constants.epsilon) ++report.below_bound;
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Per-mode reduction of the positivity estimate

struct InequalitySample {
    double s = 1.0;      ///< sqrt(1 + h^2 lambda)
    double gamma0 = 2.0;
};

/// (1 + C - eps) s^2 - 2 C gamma_0 s + (C gamma_0^2 - 1).
inline double inequality_margin(const ConstantsCEps& k, double s, double gamma0)
{
    return (1.0 + k.C - k.epsilon) * s * s - 2.0 * k.C * gamma0 * s + (k.C * gamma0 * gamma0 - 1.0);
}

struct InequalityReport {
    ConstantsCEps constants;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    InequalitySample argmin;
    double min_margin_at_s1 = std::numeric_limits<double>::infinity();
};

inline InequalityReport inequality_42_check(const ConstantsCEps& k, std::span<const InequalitySample> samples)
{
    InequalityReport report;
    report.constants = k;
    for (const auto& smp : samples) {
        if (!(smp.s >= 1.0)) throw PreconditionError("s = sqrt(1 + h^2 lambda) must be >= 1");
        if (smp.gamma0 < k.c0 || smp.gamma0 > k.c1) throw PreconditionError("gamma_0 sample outside [c0, c1]");
        const double m = inequality_margin(k, smp.s, smp.gamma0);
        ++report.samples;
        if (m < 0.0) ++report.violations;
        if (m < report.min_margin) {
            report.min_margin = m;
            report.argmin = smp;
        }
        if (smp.s == 1.0) report.min_margin_at_s1 = std::min(report.min_margin_at_s1, m);
    }
    return report;
}

/// Seeded (s, gamma_0) samples from (lambda, h) pairs, lambda in [0, lambda_max],
/// h in (0, h_max]; the first samples pin s = 1 at c0 and c1.
inline std::vector<InequalitySample> sample_inequality_pairs(const ConstantsCEps& k, std::size_t count,
    std::uint64_t seed = 42, double lambda_max = 1e4, double h_max = 1.0)
{
    std::vector<InequalitySample> out;
    out.reserve(count);
    out.push_back({1.0, k.c0});
    out.push_back({1.0, k.c1});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    while (out.size() < count) {
        const double lambda = lambda_max * unit(rng);
        const double h = h_max * (1.0 - unit(rng));
        const double g = k.c0 + (k.c1 - k.c0) * unit(rng);
        out.push_back({std::sqrt(1.0 + h * h * lambda), g});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV with columns r, N_scalar, N_system, W, borderline; LF line endings.
inline void write_csv(std::ostream& out, const CountReport& report)
{
    out << "r,N_scalar,N_system,W,borderline\n";
    for (const auto& row : report.rows) {
        out << format_real(row.r) << ',' << row.n_scalar << ',' << row.n_system << ',' << format_real(row.weyl) << ','
            << row.borderline << '\n';
    }
}

inline nlohmann::json to_json(const CountReport& report, const nlohmann::json& config = nlohmann::json::object())
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        rows.push_back({{"r", row.r}, {"h", row.h}, {"N_scalar", row.n_scalar}, {"N_system", row.n_system},
            {"W", row.weyl}, {"borderline", row.borderline}, {"mode_cut", row.mode_cut},
            {"stability_mode_cut", row.stability_mode_cut}, {"stability_N_scalar", row.stability_n_scalar}});
    }
    nlohmann::json j;
    j["version"] = kVersion;
    j["config"] = config;
    j["rows"] = rows;
    j["weyl_coefficient"] = report.weyl_coefficient;
    j["fit"] = {{"coefficient", report.fitted_coefficient}, {"exponent", report.top_half_fit.exponent},
        {"prefactor", report.top_half_fit.prefactor}, {"points", report.top_half_fit.points}};
    j["truncation"] = {{"checked", report.stability_checked}, {"stable", report.truncation_stable},
        {"max_delta", report.max_stability_delta}};
    j["gates"] = {{"monotone", report.monotone}, {"truncation_stable", report.truncation_stable},
        {"exponent_applicable", report.exponent_gate_applicable}, {"exponent_pass", report.exponent_gate_pass},
        {"pass", report.gates_pass()}};
    j["supported_count"] = report.supported_count;
    return j;
}

inline nlohmann::json to_json(const MonotonicityReport& report)
{
    return {{"epsilon", report.constants.epsilon}, {"delta", report.constants.delta},
        {"tracked", report.slopes.size()}, {"skipped", report.skipped}, {"nonpositive", report.nonpositive},
        {"below_epsilon_quarter", report.below_bound},
        {"min_slope", report.slopes.empty() ? 0.0 : report.min_slope}, {"max_slope", report.max_slope},
        {"pass", report.passes()}};
}

} // namespace weylab
