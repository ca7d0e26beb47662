#pragma once

#include "errors.hpp"
#include "mesh.hpp"
#include "semiclassical.hpp"
#include "surface.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace weylab {

/// Flat key/value settings. Later assignments override earlier ones.
using Settings = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

inline double parse_real(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw UsageError("'" + key + "' expects a number, got '" + text + "'");
    }
}

inline long long parse_integer(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw UsageError("'" + key + "' expects an integer, got '" + text + "'");
    }
}

inline std::vector<double> parse_reals(const std::string& key, const std::string& text)
{
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_real(key, item));
    return out;
}

} // namespace detail

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
inline Settings parse_settings(std::istream& in)
{
    Settings s;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("config line " + std::to_string(number) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        if (key.empty()) throw UsageError("config line " + std::to_string(number) + ": empty key");
        s[key] = detail::trim(line.substr(eq + 1));
    }
    return s;
}

inline Settings load_settings(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    return parse_settings(in);
}

/// Damping field description: `constant:c`, `affine:a,b,wx,wy,wz` or
/// `table:path`, optionally wrapped as `reciprocal:<spec>`.
inline GammaField parse_gamma(const std::string& spec, std::size_t vertex_count = 0)
{
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw UsageError("gamma spec needs a kind prefix: " + spec);
    const std::string kind = spec.substr(0, colon);
    const std::string body = spec.substr(colon + 1);
    if (kind == "reciprocal") return parse_gamma(body, vertex_count).reciprocal();
    if (kind == "constant") return GammaField::constant(detail::parse_real("gamma", body));
    if (kind == "affine") {
        const auto v = detail::parse_reals("gamma", body);
        if (v.size() != 5) throw UsageError("affine gamma expects a,b,wx,wy,wz");
        return GammaField::affine(v[0], v[1], Vec3(v[2], v[3], v[4]));
    }
    if (kind == "table") {
        if (vertex_count == 0) throw UsageError("a per-vertex gamma table needs a mesh surface");
        return GammaField::per_vertex(read_gamma_table(body, vertex_count));
    }
    throw UsageError("unknown gamma kind '" + kind + "'");
}

/// Resolved run configuration.
struct RunConfig {
    std::string surface = "unit-sphere"; ///< unit-sphere | ellipsoid
    std::vector<double> axes{1.0, 1.0, 1.0};
    std::string mesh;                    ///< OFF path; overrides surface
    int icosphere = -1;                  ///< built-in icosphere level; overrides surface
    std::string gamma = "constant:2";
    bool exact = false;
    int max_degree = -1;                 ///< exact basis degree; -1 sizes it from the r grid
    std::size_t count = 200;
    double tolerance = 1e-8;
    std::string cache_dir = ".weylab-cache";
    std::vector<double> r_list;
    double r_min = 5.0;
    double r_max = 20.0;
    long long r_steps = 4;
    std::string r_spacing = "linear";
    double mode_cut_factor = 2.0;
    std::optional<std::size_t> mode_cut;
    double zero_tol = kDefaultZeroTol;
    std::string output_dir = ".";
    std::uint64_t seed = 42;
    std::size_t samples = 1000;
    Settings resolved;

    bool uses_mesh() const { return !mesh.empty() || icosphere >= 0; }

    /// Grid of r values: the explicit list if given, else steps points.
    std::vector<double> r_grid() const
    {
        if (!r_list.empty()) return r_list;
        std::vector<double> grid;
        for (long long i = 0; i < r_steps; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(r_steps - 1);
            grid.push_back(r_spacing == "log" ? r_min * std::pow(r_max / r_min, t) : r_min + t * (r_max - r_min));
        }
        return grid;
    }

    static RunConfig from_settings(const Settings& s)
    {
        RunConfig c;
        c.resolved = s;
        auto get = [&s](const char* key) -> const std::string* {
            const auto it = s.find(key);
            return it == s.end() ? nullptr : &it->second;
        };
        auto truthy = [](const std::string& v) { return v == "1" || v == "true" || v == "yes" || v == "on"; };
        if (auto v = get("surface")) c.surface = *v;
        if (auto v = get("axes")) c.axes = detail::parse_reals("axes", *v);
        if (auto v = get("mesh")) c.mesh = *v;
        if (auto v = get("icosphere")) c.icosphere = static_cast<int>(detail::parse_integer("icosphere", *v));
        if (auto v = get("gamma")) c.gamma = *v;
        if (auto v = get("exact")) c.exact = truthy(*v);
        if (auto v = get("max_degree")) c.max_degree = static_cast<int>(detail::parse_integer("max_degree", *v));
        if (auto v = get("count")) {
            const auto n = detail::parse_integer("count", *v);
            if (n < 1) throw UsageError("count must be >= 1");
            c.count = static_cast<std::size_t>(n);
        }
        if (auto v = get("tolerance")) c.tolerance = detail::parse_real("tolerance", *v);
        if (auto v = get("cache_dir")) c.cache_dir = *v;
        if (auto v = get("r")) c.r_list = detail::parse_reals("r", *v);
        if (auto v = get("r_min")) c.r_min = detail::parse_real("r_min", *v);
        if (auto v = get("r_max")) c.r_max = detail::parse_real("r_max", *v);
        if (auto v = get("r_steps")) c.r_steps = detail::parse_integer("r_steps", *v);
        if (auto v = get("r_spacing")) c.r_spacing = *v;
        if (auto v = get("mode_cut_factor")) c.mode_cut_factor = detail::parse_real("mode_cut_factor", *v);
        if (auto v = get("mode_cut")) {
            const auto n = detail::parse_integer("mode_cut", *v);
            if (n < 1) throw UsageError("mode_cut must be >= 1");
            c.mode_cut = static_cast<std::size_t>(n);
        }
        if (auto v = get("zero_tol")) c.zero_tol = detail::parse_real("zero_tol", *v);
        if (auto v = get("output_dir")) c.output_dir = *v;
        if (auto v = get("seed")) c.seed = static_cast<std::uint64_t>(detail::parse_integer("seed", *v));
        if (auto v = get("samples")) {
            const auto n = detail::parse_integer("samples", *v);
            if (n < 1) throw UsageError("samples must be >= 1");
            c.samples = static_cast<std::size_t>(n);
        }
        c.validate();
        return c;
    }

    void validate() const
    {
        if (surface != "unit-sphere" && surface != "ellipsoid") throw UsageError("unknown surface '" + surface + "'");
        if (axes.size() != 3 || axes[0] <= 0 || axes[1] <= 0 || axes[2] <= 0) {
            throw UsageError("axes expects three positive values");
        }
        if (max_degree < -1) throw UsageError("max_degree must be >= 0, or -1 for automatic");
        if (r_list.empty()) {
            if (r_steps < 2) throw UsageError("r_steps must be >= 2");
            if (!(r_min > 0.0) || !(r_max > r_min)) throw UsageError("need 0 < r_min < r_max");
            if (r_spacing != "linear" && r_spacing != "log") throw UsageError("r_spacing is linear or log");
        } else {
            for (std::size_t i = 0; i < r_list.size(); ++i) {
                if (!(r_list[i] > 0.0) || (i > 0 && !(r_list[i] > r_list[i - 1]))) {
                    throw UsageError("r list must be positive and strictly ascending");
                }
            }
        }
        if (!(mode_cut_factor >= 1.0)) throw UsageError("mode_cut_factor must be >= 1");
        if (!(zero_tol >= 0.0)) throw UsageError("zero_tol must be >= 0");
        if (exact && uses_mesh()) throw UsageError("the exact basis applies to the analytic unit sphere only");
    }

    nlohmann::json echo() const
    {
        nlohmann::json j = nlohmann::json::object();
        j["surface"] = surface;
        j["axes"] = axes;
        j["mesh"] = mesh;
        j["icosphere"] = icosphere;
        j["gamma"] = gamma;
        j["exact"] = exact;
        j["max_degree"] = max_degree;
        j["count"] = count;
        j["tolerance"] = tolerance;
        j["r_grid"] = r_grid();
        j["mode_cut_factor"] = mode_cut_factor;
        j["mode_cut"] = mode_cut ? nlohmann::json(*mode_cut) : nlohmann::json(nullptr);
        j["zero_tol"] = zero_tol;
        j["seed"] = seed;
        j["samples"] = samples;
        return j;
    }
};

} // namespace weylab
