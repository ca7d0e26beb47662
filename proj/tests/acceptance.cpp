// Acceptance harness: one PASS/FAIL line per criterion, with timings.

#include <weylab.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace weylab;

// Tolerances and budgets.
constexpr double kC2CoefficientHalfWidth = 0.35;
constexpr double kC3RatioHalfWidth = 0.4;
constexpr double kC5EigenRelTol = 0.02;
constexpr double kC6Gate = 1e-8;
constexpr std::size_t kC6Samples = 1000;
constexpr std::size_t kC7Samples = 10000;
constexpr double kC1Budget = 1.0, kC2Budget = 10.0, kC3Budget = 120.0, kC5Budget = 300.0, kC6Budget = 10.0,
                 kC7Budget = 1.0, kC9Budget = 1.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

/// sum of (2n+1) over n(n+1) < r^2 (gamma0^2 - 1).
std::size_t sphere_count_oracle(double gamma0, double r)
{
    const double threshold = r * r * (gamma0 * gamma0 - 1.0);
    std::size_t total = 0;
    for (int n = 0; n * (n + 1.0) < threshold; ++n) total += 2 * n + 1;
    return total;
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

const Boundary& sphere()
{
    static const Boundary b(AnalyticSurface::unit_sphere());
    return b;
}

Outcome criterion1()
{
    const auto basis = exact_sphere_spectrum(80);
    const auto f = GammaField::constant(2.0);
    const auto b = sphere().bounds(f);
    const std::pair<double, std::size_t> table[] = {{5, 81}, {10, 289}, {20, 1225}};
    std::ostringstream d;
    bool ok = true;
    for (const auto& [r, expected] : table) {
        const auto n = count_negative(build_Q(basis, f, b, 1.0 / r)).negative;
        ok = ok && n == expected && n == sphere_count_oracle(2.0, r);
        d << "N(" << r << ")=" << n << ' ';
    }
    double worst = 0.0;
    for (double r = 3.0; r <= 30.0; r += 0.25) {
        const auto n = static_cast<double>(count_negative(build_Q(basis, f, b, 1.0 / r)).negative);
        const double excess = std::abs(n - 3.0 * r * r) / (6.0 * r);
        worst = std::max(worst, excess);
        ok = ok && n == static_cast<double>(sphere_count_oracle(2.0, r));
    }
    ok = ok && worst <= 1.0;
    d << "max |N-3r^2|/(6r)=" << fmt("%.3f", worst);
    return {ok, d.str()};
}

Outcome criterion2()
{
    const auto basis = exact_sphere_spectrum(80);
    ScanOptions o;
    for (int r = 10; r <= 30; ++r) o.r_grid.push_back(r);
    o.check_stability = false;
    const auto report = scan(sphere(), GammaField::constant(2.0), basis, o);
    const double a = report.fitted_coefficient, p = report.top_half_fit.exponent;
    const bool ok = std::abs(a - 3.0) <= kC2CoefficientHalfWidth && p >= kExponentLow && p <= kExponentHigh;
    return {ok, "coefficient=" + fmt("%.4f", a) + " exponent=" + fmt("%.4f", p)};
}

struct VariableRun {
    CountReport report;
    std::string json;
    MonotonicityReport mono;
    double seconds_mono = 0.0;
};

const std::vector<double> kC3Grid{6, 8, 10, 12, 14, 16};

VariableRun variable_run(const GammaField& f, bool probe)
{
    static const SpectralBasis basis = exact_sphere_spectrum(72);
    VariableRun run;
    ScanOptions o;
    o.r_grid = kC3Grid;
    run.report = scan(sphere(), f, basis, o);
    run.json = weylab::to_json(run.report).dump();
    if (probe) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<double> hs;
        for (double r : kC3Grid) hs.push_back(1.0 / r);
        run.mono = monotonicity_probe(sphere(), f, basis, hs);
        run.seconds_mono = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return run;
}

const GammaField kAffine = GammaField::affine(2.0, 0.5, Vec3(0, 0, 1));

const VariableRun& criterion3_run()
{
    static const VariableRun run = variable_run(kAffine, true);
    return run;
}

Outcome criterion3()
{
    const auto& run = criterion3_run();
    const auto& last = run.report.rows.back();
    const double ratio = static_cast<double>(last.n_scalar) / (last.r * last.r);
    const bool ok = std::abs(ratio - 37.0 / 12.0) <= kC3RatioHalfWidth && run.report.stability_checked
        && run.report.truncation_stable && last.stability_n_scalar == last.n_scalar;
    return {ok, "N(16)=" + std::to_string(last.n_scalar) + " N/r^2=" + fmt("%.4f", ratio)
            + " target=3.0833 recount(x1.5)=" + std::to_string(last.stability_n_scalar)};
}

Outcome criterion4()
{
    const auto mirrored = variable_run(kAffine.reciprocal(), false);
    const bool ok = mirrored.json == criterion3_run().json;
    return {ok, ok ? "reciprocal-field report identical" : "reports differ"};
}

Outcome criterion5()
{
    const auto mesh = make_icosphere(4);
    const auto fem = solve_lowest(mesh, 400);
    double worst = 0.0;
    std::size_t i = 1;
    for (int n = 1; n <= 10; ++n) {
        const double exact = n * (n + 1.0);
        for (int k = 0; k < 2 * n + 1; ++k, ++i) worst = std::max(worst, std::abs(fem.eigenvalues[i] - exact) / exact);
    }
    bool ok = worst <= kC5EigenRelTol && std::abs(fem.eigenvalues[0]) < 1e-8;
    const Boundary boundary(mesh);
    const auto f = GammaField::constant(2.0);
    const auto exact = exact_sphere_spectrum(40);
    std::ostringstream d;
    d << "max rel err n<=10: " << fmt("%.4f", worst) << "; N fem/exact:";
    for (int r = 1; r <= 6; ++r) {
        const double h = 1.0 / r;
        const auto cf = count_negative(build_Q(fem, f, boundary.bounds(f), h, {}, &mesh));
        const auto ce = count_negative(build_Q(exact, f, sphere().bounds(f), h));
        const std::size_t diff = cf.negative > ce.negative ? cf.negative - ce.negative : ce.negative - cf.negative;
        ok = ok && diff <= cf.borderline + ce.borderline;
        d << ' ' << cf.negative << '/' << ce.negative;
    }
    return {ok, d.str()};
}

Outcome criterion6()
{
    std::ostringstream d;
    bool ok = true;
    for (const auto& s : {AnalyticSurface::unit_sphere(), AnalyticSurface::ellipsoid(2, 1, 1)}) {
        const auto report = run_symbol_suite(s, kC6Samples, kDefaultSymbolSeed);
        double worst = 0.0;
        for (const auto& [name, r] : report.identities) worst = std::max(worst, r.max_residual);
        ok = ok && report.passes(kC6Gate);
        d << s.name() << " max=" << fmt("%.2e", worst) << ' ';
        for (const auto& name : report.failing(kC6Gate)) d << "[fail " << name << "] ";
    }
    return {ok, d.str()};
}

Outcome criterion7()
{
    std::ostringstream d;
    bool ok = true;
    for (double g : {1.5, 2.0, 5.0}) {
        const auto k = ConstantsCEps::from_range(g, g);
        const auto report = inequality_42_check(k, sample_inequality_pairs(k, kC7Samples));
        ok = ok && report.violations == 0 && report.min_margin >= 0.0 && report.min_margin_at_s1 >= 0.5 * k.epsilon;
        d << "g0=" << g << " min=" << fmt("%.3e", report.min_margin) << " s1=" << fmt("%.3e", report.min_margin_at_s1)
          << " eps=" << fmt("%.3e", k.epsilon) << "; ";
    }
    return {ok, d.str()};
}

Outcome criterion8()
{
    const auto& m = criterion3_run().mono;
    const bool ok = m.passes() && !m.slopes.empty();
    return {ok, "tracked=" + std::to_string(m.slopes.size()) + " skipped=" + std::to_string(m.skipped)
            + " nonpositive=" + std::to_string(m.nonpositive) + " min=" + fmt("%.4f", m.min_slope)
            + " max=" + fmt("%.4f", m.max_slope) + " probe " + fmt("%.2fs", criterion3_run().seconds_mono)};
}

Outcome criterion9()
{
    bool ok = bound_c0(2.0) == 1.0 && bound_c0(5.0) == 0.25 && bound_c0(1.25) == 2.0;
    using C = std::complex<double>;
    RegionParams base;
    RegionParams eps = base;
    eps.eps_power = 0.1;
    struct Row {
        C z;
        int set; // 0 Lambda, 1 Lambda_eps, 2 R_M
        const RegionParams* p;
        bool expected;
    };
    const Row rows[] = {
        {C(-3, 0), 0, &base, true},
        {C(-3, 0.1), 0, &base, false},
        {C(-1, 0), 0, &base, false},
        {C(-2, 1), 1, &eps, true},
        {C(-3, 0.05), 2, &base, true},
        {C(0.5, 0), 0, &base, false},
        {C(0.5, 0), 1, &base, false},
        {C(0.5, 0), 2, &base, false},
    };
    int matched = 0;
    for (const auto& row : rows) {
        const bool got = row.set == 0 ? in_Lambda(row.z, *row.p)
            : row.set == 1            ? in_Lambda_eps(row.z, *row.p)
                                      : in_R_M(row.z, *row.p);
        matched += got == row.expected;
    }
    ok = ok && matched == static_cast<int>(std::size(rows));
    return {ok, "bound table exact; memberships " + std::to_string(matched) + "/" + std::to_string(std::size(rows))};
}

} // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        double budget;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "sphere constant-damping count oracle", kC1Budget, criterion1},
        {2, "Weyl coefficient and exponent, constant damping", kC2Budget, criterion2},
        {3, "variable damping 2+0.5z at r=16", kC3Budget, criterion3},
        {4, "regime symmetry", kC3Budget, criterion4},
        {5, "icosphere level-4 mesh consistency", kC5Budget, criterion5},
        {6, "symbol identity suite", kC6Budget, criterion6},
        {7, "per-mode positivity inequality", kC7Budget, criterion7},
        {8, "eigenvalue branch monotonicity", kC3Budget, criterion8},
        {9, "regions and bound constant", kC9Budget, criterion9},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = seconds <= c.budget;
        const bool pass = o.pass && in_budget;
        failures += !pass;
        std::printf("%s criterion %d (%s): %s [%.2fs, budget %.0fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
            o.detail.c_str(), seconds, c.budget, in_budget ? "" : ", over budget");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
