// Command-line front end: spectrum, scan, count, weyl, verify-symbols, regions.

#include <weylab.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

namespace {

using namespace weylab;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitResource = 2;
constexpr int kExitGate = 3;
constexpr int kExitUsage = 64;

/// Command-line values that override config-file settings when given.
class Overrides {
public:
    void option(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help)
    {
        auto& slot = *slots_.emplace_back(std::make_unique<Slot>(Slot{key, {}, nullptr}));
        slot.opt = app->add_option(flag, slot.value, help);
    }

    void flag(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help)
    {
        auto& slot = *slots_.emplace_back(std::make_unique<Slot>(Slot{key, "true", nullptr}));
        slot.opt = app->add_flag(flag, help);
    }

    Settings apply(Settings base) const
    {
        for (const auto& s : slots_) {
            if (s->opt->count() > 0) base[s->key] = s->value;
        }
        return base;
    }

private:
    struct Slot {
        std::string key;
        std::string value;
        CLI::Option* opt;
    };
    std::vector<std::unique_ptr<Slot>> slots_;
};

struct Command {
    CLI::App* app = nullptr;
    std::string config_path;
    Overrides overrides;

    RunConfig resolve() const
    {
        Settings base = config_path.empty() ? Settings{} : load_settings(config_path);
        return RunConfig::from_settings(overrides.apply(std::move(base)));
    }
};

void add_surface_options(Command& c)
{
    c.overrides.option(c.app, "--surface", "surface", "unit-sphere or ellipsoid");
    c.overrides.option(c.app, "--axes", "axes", "ellipsoid semi-axes a,b,c");
    c.overrides.option(c.app, "--mesh", "mesh", "OFF mesh file");
    c.overrides.option(c.app, "--icosphere", "icosphere", "built-in icosphere level");
}

void add_spectrum_options(Command& c)
{
    c.overrides.flag(c.app, "--exact", "exact", "closed-form unit-sphere spectrum");
    c.overrides.option(c.app, "--max-degree", "max_degree", "highest spherical-harmonic degree of the exact basis");
    c.overrides.option(c.app, "--count", "count", "number of mesh eigenpairs");
    c.overrides.option(c.app, "--tolerance", "tolerance", "eigensolver residual tolerance");
    c.overrides.option(c.app, "--cache-dir", "cache_dir", "spectrum cache directory");
}

void add_count_options(Command& c)
{
    c.overrides.option(c.app, "--gamma", "gamma", "constant:c | affine:a,b,wx,wy,wz | table:path | reciprocal:<spec>");
    c.overrides.option(c.app, "--mode-cut", "mode_cut", "fixed Galerkin truncation");
    c.overrides.option(c.app, "--mode-cut-factor", "mode_cut_factor", "truncation target as a multiple of the threshold");
    c.overrides.option(c.app, "--zero-tol", "zero_tol", "borderline eigenvalue half-width");
}

void add_grid_options(Command& c)
{
    c.overrides.option(c.app, "--r", "r", "explicit comma-separated r values");
    c.overrides.option(c.app, "--r-min", "r_min", "smallest r");
    c.overrides.option(c.app, "--r-max", "r_max", "largest r");
    c.overrides.option(c.app, "--steps", "r_steps", "number of grid points (>= 2)");
    c.overrides.option(c.app, "--spacing", "r_spacing", "linear or log");
}

Boundary make_boundary(const RunConfig& cfg)
{
    if (!cfg.mesh.empty()) return Boundary(read_off(cfg.mesh));
    if (cfg.icosphere >= 0) return Boundary(make_icosphere(cfg.icosphere));
    if (cfg.surface == "ellipsoid") return Boundary(AnalyticSurface::ellipsoid(cfg.axes[0], cfg.axes[1], cfg.axes[2]));
    return Boundary(AnalyticSurface::unit_sphere());
}

struct BasisResult {
    SpectralBasis basis;
    bool cache_hit = false;
};

/// Exact degree covering the widest truncation a scan up to r_max may ask for.
int automatic_degree(const RunConfig& cfg, double c1)
{
    const auto grid = cfg.r_grid();
    const double lambda = 1.5 * cfg.mode_cut_factor * ellipticity_threshold(c1, 1.0 / grid.back());
    return static_cast<int>(std::ceil(1.25 * (sphere_degree_reaching(lambda) + 1))) + 2;
}

BasisResult make_basis(const RunConfig& cfg, const Boundary& boundary, double c1)
{
    if (cfg.exact) {
        if (boundary.is_mesh() || boundary.analytic().name() != "unit-sphere") {
            throw UsageError("the exact basis applies to the analytic unit sphere only");
        }
        const int degree = cfg.max_degree >= 0 ? cfg.max_degree : automatic_degree(cfg, c1);
        return {exact_sphere_spectrum(degree), false};
    }
    if (!boundary.is_mesh()) throw UsageError("analytic surfaces need --exact or a mesh (--mesh / --icosphere)");
    const SurfaceMesh& mesh = boundary.mesh();
    const SpectrumCache cache(cfg.cache_dir);
    const CacheKey key = cache_key(mesh, cfg.count, cfg.tolerance);
    if (auto cached = cache.load(key)) return {std::move(*cached), true};
    SolverOptions opts;
    opts.tolerance = cfg.tolerance;
    SpectralBasis basis = solve_lowest(mesh, cfg.count, opts);
    cache.store(key, basis);
    return {std::move(basis), false};
}

std::filesystem::path output_path(const RunConfig& cfg, const std::string& name)
{
    std::filesystem::create_directories(cfg.output_dir);
    return std::filesystem::path(cfg.output_dir) / name;
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

int cmd_spectrum(const RunConfig& cfg)
{
    const Boundary boundary = make_boundary(cfg);
    RunConfig sized = cfg;
    if (sized.exact && sized.max_degree < 0) sized.max_degree = 10;
    const BasisResult result = make_basis(sized, boundary, 2.0);
    const SpectralBasis& b = result.basis;
    double worst = 0.0;
    for (double r : b.residuals) worst = std::max(worst, r);
    std::cout << "source: " << to_string(b.source) << '\n'
              << "modes: " << b.mode_count() << '\n'
              << "horizon: " << format_real(b.horizon) << '\n'
              << "top eigenvalue: " << format_real(b.top_eigenvalue()) << '\n';
    if (b.source == SpectrumSource::mesh_fem) {
        std::cout << "max residual: " << format_real(worst) << '\n'
                  << (result.cache_hit ? "cache hit" : "cache miss (stored)") << '\n';
    }
    if (cfg.resolved.count("output_dir")) {
        std::ofstream out(output_path(cfg, "spectrum.csv"));
        out << "index,lambda,residual\n";
        for (std::size_t i = 0; i < b.eigenvalues.size(); ++i) {
            out << i << ',' << format_real(b.eigenvalues[i]) << ','
                << format_real(i < b.residuals.size() ? b.residuals[i] : 0.0) << '\n';
        }
    }
    return kExitOk;
}

ModeCutPolicy policy_of(const RunConfig& cfg)
{
    ModeCutPolicy p;
    p.factor = cfg.mode_cut_factor;
    p.fixed = cfg.mode_cut;
    return p;
}

int cmd_scan(const RunConfig& cfg)
{
    const Boundary boundary = make_boundary(cfg);
    const GammaField field = parse_gamma(cfg.gamma, boundary.is_mesh() ? boundary.mesh().vertex_count() : 0);
    const GammaBounds bounds = boundary.bounds(field);
    const BasisResult basis = make_basis(cfg, boundary, bounds.c1);

    ScanOptions opts;
    opts.r_grid = cfg.r_grid();
    opts.policy = policy_of(cfg);
    opts.zero_tol = cfg.zero_tol;
    const CountReport report = scan(boundary, field, basis.basis, opts);

    std::vector<double> hs;
    for (double r : opts.r_grid) hs.push_back(1.0 / r);
    const MonotonicityReport mono = monotonicity_probe(boundary, field, basis.basis, hs, opts.policy);

    json j = weylab::to_json(report, cfg.echo());
    j["monotonicity"] = weylab::to_json(mono);
    j["gates"]["branch_monotone"] = mono.passes();
    const bool pass = report.gates_pass() && mono.passes();
    j["gates"]["pass"] = pass;

    {
        std::ofstream csv(output_path(cfg, "count_report.csv"), std::ios::binary);
        write_csv(csv, report);
    }
    {
        std::ofstream js(output_path(cfg, "count_report.json"), std::ios::binary);
        js << j.dump(2) << '\n';
    }
    write_csv(std::cout, report);
    std::cout << "weyl coefficient: " << format_real(report.weyl_coefficient) << '\n'
              << "fitted coefficient: " << format_real(report.fitted_coefficient) << '\n'
              << "fitted exponent: " << format_real(report.top_half_fit.exponent) << '\n'
              << "supported count: " << report.supported_count << '\n'
              << "gates: " << (pass ? "pass" : "FAIL") << '\n';
    return pass ? kExitOk : kExitGate;
}

int cmd_count(const RunConfig& cfg, double r)
{
    if (!(r > 0.0)) throw UsageError("--at expects r > 0");
    RunConfig sized = cfg;
    sized.r_list = {r};
    const Boundary boundary = make_boundary(sized);
    const GammaField field = parse_gamma(cfg.gamma, boundary.is_mesh() ? boundary.mesh().vertex_count() : 0);
    const GammaBounds bounds = boundary.bounds(field);
    const BasisResult basis = make_basis(sized, boundary, bounds.c1);
    const double h = 1.0 / r;
    const GalerkinOperator op = build_Q(basis.basis, field, bounds, h, policy_of(cfg), boundary.mesh_ptr());
    const CountResult c = count_negative(op, cfg.zero_tol);
    json j;
    j["r"] = r;
    j["N_scalar"] = c.negative;
    j["N_system"] = 2 * c.negative;
    j["borderline"] = c.borderline;
    j["min_eigenvalue"] = c.min_eigenvalue;
    j["mode_cut"] = op.mode_cut;
    j["W"] = weyl_prediction(boundary, field, r);
    j["version"] = kVersion;
    j["config"] = cfg.echo();
    print_json(j);
    return kExitOk;
}

int cmd_weyl(const RunConfig& cfg, const std::vector<double>& rs)
{
    const Boundary boundary = make_boundary(cfg);
    const GammaField field = parse_gamma(cfg.gamma, boundary.is_mesh() ? boundary.mesh().vertex_count() : 0);
    json j;
    j["coefficient"] = weyl_coefficient(boundary, field);
    j["surface"] = boundary.name();
    j["gamma"] = field.describe();
    json w = json::array();
    for (double r : rs) {
        if (!(r > 0.0)) throw UsageError("r must be positive");
        w.push_back({{"r", r}, {"W", weyl_prediction(boundary, field, r)}});
    }
    j["predictions"] = w;
    j["version"] = kVersion;
    print_json(j);
    return kExitOk;
}

int cmd_verify_symbols(const RunConfig& cfg)
{
    if (cfg.uses_mesh()) throw UsageError("the symbol suite runs on analytic surfaces");
    const AnalyticSurface surface = cfg.surface == "ellipsoid"
        ? AnalyticSurface::ellipsoid(cfg.axes[0], cfg.axes[1], cfg.axes[2])
        : AnalyticSurface::unit_sphere();
    const SymbolSuiteReport report = run_symbol_suite(surface, cfg.samples, cfg.seed);
    json j = weylab::to_json(report);
    j["version"] = kVersion;
    j["config"] = cfg.echo();
    print_json(j);
    if (!report.passes()) {
        for (const auto& name : report.failing()) std::cerr << "identity failed: " << name << '\n';
        return kExitGate;
    }
    return kExitOk;
}

struct RegionArgs {
    std::string check;
    std::vector<double> gamma0;
    RegionParams params;
};

int cmd_regions(const RegionArgs& args)
{
    args.params.validate();
    json j;
    j["params"] = {{"C0", args.params.lambda_c0}, {"C2", args.params.lambda_c2}, {"C_eps", args.params.eps_scale},
        {"eps", args.params.eps_power}, {"C_M", args.params.rm_scale}, {"M", args.params.rm_power}};
    j["version"] = kVersion;
    if (!args.gamma0.empty()) {
        json bounds = json::array();
        for (double g : args.gamma0) bounds.push_back({{"gamma0", g}, {"c0", bound_c0(g)}});
        j["bound_c0"] = bounds;
    }
    if (!args.check.empty()) {
        std::ifstream in(args.check);
        if (!in) throw PreconditionError("cannot open " + args.check);
        json points = json::array();
        std::string line;
        std::size_t number = 0;
        while (std::getline(in, line)) {
            ++number;
            if (detail::trim(line).empty() || detail::trim(line)[0] == '#') continue;
            std::istringstream ls(line);
            double re = 0.0, im = 0.0;
            std::string extra;
            if (!(ls >> re >> im) || (ls >> extra)) {
                throw FormatError("line " + std::to_string(number) + ": expected 're im'");
            }
            const std::complex<double> z(re, im);
            points.push_back({{"re", re}, {"im", im}, {"Lambda", in_Lambda(z, args.params)},
                {"Lambda_eps", in_Lambda_eps(z, args.params)}, {"R_M", in_R_M(z, args.params)}});
        }
        j["points"] = points;
    }
    print_json(j);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Numerical laboratory for the eigenvalue counting law of the dissipative Maxwell boundary problem"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    auto make = [&app](const std::string& name, const std::string& help) {
        auto c = std::make_unique<Command>();
        c->app = app.add_subcommand(name, help);
        c->app->add_option("--config", c->config_path, "key = value settings file; flags override it");
        c->overrides.option(c->app, "--output-dir", "output_dir", "directory for report files");
        return c;
    };

    auto spectrum = make("spectrum", "compute or load a Laplace-Beltrami spectrum");
    add_surface_options(*spectrum);
    add_spectrum_options(*spectrum);

    auto scan_cmd = make("scan", "count negative eigenvalues over an r grid and write CSV/JSON reports");
    add_surface_options(*scan_cmd);
    add_spectrum_options(*scan_cmd);
    add_count_options(*scan_cmd);
    add_grid_options(*scan_cmd);

    auto count = make("count", "count negative eigenvalues at one r");
    add_surface_options(*count);
    add_spectrum_options(*count);
    add_count_options(*count);
    double count_r = 0.0;
    count->app->add_option("--at", count_r, "value of r")->required();

    auto weyl = make("weyl", "evaluate the Weyl prediction");
    add_surface_options(*weyl);
    weyl->overrides.option(weyl->app, "--gamma", "gamma", "damping field spec");
    std::vector<double> weyl_r;
    weyl->app->add_option("--at", weyl_r, "values of r");

    auto verify = make("verify-symbols", "check the pointwise symbol identities");
    verify->overrides.option(verify->app, "--surface", "surface", "unit-sphere or ellipsoid");
    verify->overrides.option(verify->app, "--axes", "axes", "ellipsoid semi-axes a,b,c");
    verify->overrides.option(verify->app, "--samples", "samples", "number of random samples");
    verify->overrides.option(verify->app, "--seed", "seed", "random seed");

    RegionArgs region_args;
    auto* regions = app.add_subcommand("regions", "evaluate region membership and the eigenvalue bound constant");
    regions->add_option("--check", region_args.check, "file of 're im' lines");
    regions->add_option("--bound-c0", region_args.gamma0, "gamma_0 values for the bound constant");
    regions->add_option("--C0", region_args.params.lambda_c0, "abscissa constant (>= 1, >= 2 C2)");
    regions->add_option("--C2", region_args.params.lambda_c2, "width constant");
    regions->add_option("--C-eps", region_args.params.eps_scale, "parabolic region scale");
    regions->add_option("--eps", region_args.params.eps_power, "parabolic region exponent offset, in (0, 1/2)");
    regions->add_option("--C-M", region_args.params.rm_scale, "polynomial region scale");
    regions->add_option("--M", region_args.params.rm_power, "polynomial region order (>= 2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (spectrum->app->parsed()) return cmd_spectrum(spectrum->resolve());
        if (scan_cmd->app->parsed()) return cmd_scan(scan_cmd->resolve());
        if (count->app->parsed()) return cmd_count(count->resolve(), count_r);
        if (weyl->app->parsed()) return cmd_weyl(weyl->resolve(), weyl_r);
        if (verify->app->parsed()) return cmd_verify_symbols(verify->resolve());
        if (regions->parsed()) return cmd_regions(region_args);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InsufficientSpectrumError& e) {
        std::cerr << "insufficient spectrum: " << e.what() << " (required modes: " << e.required_modes() << ")\n";
        return kExitResource;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitResource;
    }
    return kExitUsage;
}
