#pragma once

#include "errors.hpp"
#include "quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace weylab {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
/// Columns are the tangent vectors ds/dx2 and ds/dx3.
using Tangents = Eigen::Matrix<double, 3, 2>;

inline constexpr double kFiniteDifferenceStep = 1e-6;
inline constexpr double kMinGramDeterminant = 1e-10;

struct ParamRect {
    double u_min = 0.0;
    double u_max = 1.0;
    double v_min = 0.0;
    double v_max = 1.0;

    bool contains_interior(const Vec2& x) const
    {
        return x[0] > u_min && x[0] < u_max && x[1] > v_min && x[1] < v_max;
    }
};

/// One coordinate patch x' -> s(x') of a closed surface.
///
/// The cutoff is a nonnegative function on the embedded surface that vanishes
/// outside the image of the parameter rectangle; normalized against the other
/// charts' cutoffs it gives a partition of unity for quadrature.
class Chart {
public:
    using Map = std::function<Vec3(const Vec2&)>;
    using Derivative = std::function<Tangents(const Vec2&)>;
    using Inverse = std::function<std::optional<Vec2>(const Vec3&)>;
    using Cutoff = std::function<double(const Vec3&)>;

    Chart(std::string name, ParamRect domain, Map map, Derivative derivative = {}, Inverse inverse = {},
        Cutoff cutoff = {})
        : name_(std::move(name)), domain_(domain), map_(std::move(map)), derivative_(std::move(derivative)),
          inverse_(std::move(inverse)), cutoff_(std::move(cutoff))
    {
    }

    const std::string& name() const { return name_; }
    const ParamRect& domain() const { return domain_; }
    bool has_analytic_derivative() const { return static_cast<bool>(derivative_); }

    Vec3 point(const Vec2& x) const { return map_(x); }

    Tangents tangents(const Vec2& x) const
    {
        if (derivative_) return derivative_(x);
        return finite_difference_tangents(x);
    }

    /// Central differences with step 1e-6, used when no analytic derivative is supplied.
    Tangents finite_difference_tangents(const Vec2& x) const
    {
        Tangents t;
        for (int k = 0; k < 2; ++k) {
            Vec2 e = Vec2::Zero();
            e[k] = kFiniteDifferenceStep;
            t.col(k) = (map_(x + e) - map_(x - e)) / (2.0 * kFiniteDifferenceStep);
        }
        return t;
    }

    /// Metric g_jk = <ds/dx_j, ds/dx_k>; throws on a degenerate Jacobian.
    Mat2 metric(const Vec2& x) const
    {
        const Tangents t = tangents(x);
        const Mat2 g = t.transpose() * t;
        if (!(g.determinant() > kMinGramDeterminant)) {
            throw ChartDegeneracyError("chart '" + name_ + "' is degenerate at (" + std::to_string(x[0]) + ", "
                + std::to_string(x[1]) + ")");
        }
        return g;
    }

    /// Unit outward normal at x'.
    Vec3 normal(const Vec2& x) const
    {
        metric(x);
        const Tangents t = tangents(x);
        return t.col(0).cross(t.col(1)).normalized();
    }

    std::optional<Vec2> inverse(const Vec3& p) const
    {
        if (!inverse_) return std::nullopt;
        return inverse_(p);
    }

    double cutoff(const Vec3& p) const { return cutoff_ ? cutoff_(p) : 1.0; }

private:
    std::string name_;
    ParamRect domain_;
    Map map_;
    Derivative derivative_;
    Inverse inverse_;
    Cutoff cutoff_;
};

namespace detail {

/// C-infinity step: 0 for t <= 0, 1 for t >= 1.
inline double smooth_step(double t)
{
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

/// 1 for |s| <= 0.7, 0 for |s| >= 0.95.
inline double polar_cutoff(double s)
{
    return 1.0 - smooth_step((std::abs(s) - 0.7) / 0.25);
}

inline double wrap_angle(double phi)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    phi = std::fmod(phi, two_pi);
    return phi < 0.0 ? phi + two_pi : phi;
}

} // namespace detail

enum class SurfaceKind { unit_sphere, ellipsoid };

/// Closed analytic surface described by two spherical-coordinate charts.
///
/// The first chart has its poles on the z axis, the second on the x axis;
/// both exclude a polar cap of angular radius 0.1.
class AnalyticSurface {
public:
    static AnalyticSurface unit_sphere() { return AnalyticSurface(SurfaceKind::unit_sphere, Vec3(1.0, 1.0, 1.0)); }

    static AnalyticSurface ellipsoid(double a, double b, double c)
    {
        if (!(a > 0.0 && b > 0.0 && c > 0.0)) throw PreconditionError("ellipsoid semi-axes must be positive");
        return AnalyticSurface(SurfaceKind::ellipsoid, Vec3(a, b, c));
    }

    SurfaceKind kind() const { return kind_; }
    const Vec3& semi_axes() const { return axes_; }
    const std::vector<Chart>& charts() const { return charts_; }

    std::string name() const
    {
        if (kind_ == SurfaceKind::unit_sphere) return "unit-sphere";
        return "ellipsoid(" + format_axis(axes_[0]) + "," + format_axis(axes_[1]) + "," + format_axis(axes_[2]) + ")";
    }

    /// Partition-of-unity weight of chart `index` at the surface point p.
    double partition_weight(std::size_t index, const Vec3& p) const
    {
        double total = 0.0;
        for (const auto& chart : charts_) total += chart.cutoff(p);
        return charts_.at(index).cutoff(p) / total;
    }

    /// Range of <w, x> over the surface for a unit vector w.
    std::pair<double, double> linear_range(const Vec3& w) const
    {
        const double extent = axes_.cwiseProduct(w).norm();
        return {-extent, extent};
    }

    /// Tensor composite Gauss-Legendre quadrature (order 24 per panel) on each
    /// chart, blended with the partition of unity.
    template <typename F>
    double integrate(F&& f, int order = 24, int u_panels = 32, int v_panels = 16) const
    {
        double sum = 0.0;
        for (std::size_t c = 0; c < charts_.size(); ++c) {
            const Chart& chart = charts_[c];
            const ParamRect& d = chart.domain();
            const QuadratureRule qu = composite_gauss_legendre(d.u_min, d.u_max, order, u_panels);
            const QuadratureRule qv = composite_gauss_legendre(d.v_min, d.v_max, order, v_panels);
            for (std::size_t i = 0; i < qu.nodes.size(); ++i) {
                for (std::size_t j = 0; j < qv.nodes.size(); ++j) {
                    const Vec2 x(qu.nodes[i], qv.nodes[j]);
                    const Vec3 p = chart.point(x);
                    const double weight = partition_weight(c, p);
                    if (weight == 0.0) continue;
                    const double area_element = std::sqrt(chart.metric(x).determinant());
                    sum += qu.weights[i] * qv.weights[j] * area_element * weight * f(p);
                }
            }
        }
        return sum;
    }

    double area() const
    {
        return integrate([](const Vec3&) { return 1.0; });
    }

private:
    AnalyticSurface(SurfaceKind kind, Vec3 axes) : kind_(kind), axes_(std::move(axes)) { build_charts(); }

    static std::string format_axis(double v)
    {
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    void build_charts()
    {
        const double a = axes_[0], b = axes_[1], c = axes_[2];
        constexpr double pi = std::numbers::pi;
        const ParamRect rect{0.1, pi - 0.1, 0.0, 2.0 * pi};

        // Poles on the z axis.
        charts_.emplace_back(
            "polar-z", rect,
            [=](const Vec2& x) {
                return Vec3(a * std::sin(x[0]) * std::cos(x[1]), b * std::sin(x[0]) * std::sin(x[1]),
                    c * std::cos(x[0]));
            },
            [=](const Vec2& x) {
                const double st = std::sin(x[0]), ct = std::cos(x[0]);
                const double sp = std::sin(x[1]), cp = std::cos(x[1]);
                Tangents t;
                t.col(0) << a * ct * cp, b * ct * sp, -c * st;
                t.col(1) << -a * st * sp, b * st * cp, 0.0;
                return t;
            },
            [=](const Vec3& p) -> std::optional<Vec2> {
                const double theta = std::acos(std::clamp(p[2] / c, -1.0, 1.0));
                const Vec2 x(theta, detail::wrap_angle(std::atan2(p[1] / b, p[0] / a)));
                if (!rect.contains_interior(x)) return std::nullopt;
                return x;
            },
            [=](const Vec3& p) { return detail::polar_cutoff(p[2] / c); });

        // Poles on the x axis; the z chart rotated by 90 degrees.
        charts_.emplace_back(
            "polar-x", rect,
            [=](const Vec2& x) {
                return Vec3(a * std::cos(x[0]), b * std::sin(x[0]) * std::cos(x[1]),
                    c * std::sin(x[0]) * std::sin(x[1]));
            },
            [=](const Vec2& x) {
                const double st = std::sin(x[0]), ct = std::cos(x[0]);
                const double sp = std::sin(x[1]), cp = std::cos(x[1]);
                Tangents t;
                t.col(0) << -a * st, b * ct * cp, c * ct * sp;
                t.col(1) << 0.0, -b * st * sp, c * st * cp;
                return t;
            },
            [=](const Vec3& p) -> std::optional<Vec2> {
                const double theta = std::acos(std::clamp(p[0] / a, -1.0, 1.0));
                const Vec2 x(theta, detail::wrap_angle(std::atan2(p[2] / c, p[1] / b)));
                if (!rect.contains_interior(x)) return std::nullopt;
                return x;
            },
            [=](const Vec3& p) { return detail::polar_cutoff(p[0] / a); });
    }

    SurfaceKind kind_;
    Vec3 axes_;
    std::vector<Chart> charts_;
};

inline Vec3 normal(const Chart& chart, const Vec2& x) { return chart.normal(x); }

// ---------------------------------------------------------------------------
// Damping coefficient

enum class GammaKind { constant, affine, per_vertex };
enum class GammaRegime { below_one, above_one };

inline constexpr std::size_t kNoVertex = std::numeric_limits<std::size_t>::max();

/// Damping coefficient gamma on the boundary.
///
/// The base field is constant, affine a + b<w, x>, or a per-vertex table;
/// `reciprocal()` yields the pointwise inverse 1/gamma with the same base.
class GammaField {
public:
    static GammaField constant(double c)
    {
        GammaField f;
        f.kind_ = GammaKind::constant;
        f.offset_ = c;
        return f;
    }

    static GammaField affine(double a, double b, const Vec3& direction)
    {
        if (!(direction.norm() > 0.0)) throw InvalidFieldError("affine gamma needs a nonzero direction");
        GammaField f;
        f.kind_ = GammaKind::affine;
        f.offset_ = a;
        f.slope_ = b;
        f.direction_ = direction.normalized();
        return f;
    }

    static GammaField per_vertex(std::vector<double> table)
    {
        if (table.empty()) throw InvalidFieldError("per-vertex gamma table is empty");
        GammaField f;
        f.kind_ = GammaKind::per_vertex;
        f.table_ = std::move(table);
        return f;
    }

    GammaField reciprocal() const
    {
        GammaField f = *this;
        f.inverted_ = !inverted_;
        return f;
    }

    GammaKind kind() const { return kind_; }
    bool inverted() const { return inverted_; }
    double offset() const { return offset_; }
    double slope() const { return slope_; }
    const Vec3& direction() const { return direction_; }
    const std::vector<double>& table() const { return table_; }

    /// Base field value before any inversion.
    double base(const Vec3& x, std::size_t vertex = kNoVertex) const
    {
        switch (kind_) {
        case GammaKind::constant:
            return offset_;
        case GammaKind::affine:
            return offset_ + slope_ * direction_.dot(x);
        case GammaKind::per_vertex:
            if (vertex == kNoVertex || vertex >= table_.size()) {
                throw PreconditionError("per-vertex gamma evaluated without a valid vertex index");
            }
            return table_[vertex];
        }
        return offset_;
    }

    double gamma(const Vec3& x, std::size_t vertex = kNoVertex) const
    {
        const double v = base(x, vertex);
        return inverted_ ? 1.0 / v : v;
    }

    /// gamma_0 = max(gamma, 1/gamma), evaluated from the base value so that a
    /// field and its reciprocal give bit-identical results.
    double gamma0(const Vec3& x, std::size_t vertex = kNoVertex) const
    {
        const double v = base(x, vertex);
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidFieldError("gamma must be strictly positive");
        if (v == 1.0) throw InvalidFieldError("gamma equals 1 at a boundary point");
        return std::max(v, 1.0 / v);
    }

    /// Whether gamma_0 depends on the point only through <w, x> (constant and affine bases).
    bool is_axial() const { return kind_ != GammaKind::per_vertex; }

    std::string describe() const
    {
        std::string s;
        switch (kind_) {
        case GammaKind::constant:
            s = "constant(" + std::to_string(offset_) + ")";
            break;
        case GammaKind::affine:
            s = "affine(" + std::to_string(offset_) + "," + std::to_string(slope_) + ",[" + std::to_string(direction_[0])
                + "," + std::to_string(direction_[1]) + "," + std::to_string(direction_[2]) + "])";
            break;
        case GammaKind::per_vertex:
            s = "per-vertex(" + std::to_string(table_.size()) + ")";
            break;
        }
        return inverted_ ? "reciprocal(" + s + ")" : s;
    }

private:
    GammaField() = default;

    GammaKind kind_ = GammaKind::constant;
    double offset_ = 2.0;
    double slope_ = 0.0;
    Vec3 direction_ = Vec3::UnitZ();
    std::vector<double> table_;
    bool inverted_ = false;
};

/// Extremes of gamma and gamma_0 over the boundary.
struct GammaBounds {
    double gamma_min = 0.0;
    double gamma_max = 0.0;
    double c0 = 0.0; ///< min gamma_0
    double c1 = 0.0; ///< max gamma_0
    GammaRegime regime = GammaRegime::above_one;
};

/// Validates the base range [lo, hi] (already known over the surface) and
/// derives the regime and the gamma_0 extremes.
inline GammaBounds bounds_from_base_range(const GammaField& field, double lo, double hi)
{
    if (!(lo > 0.0)) throw InvalidFieldError("gamma must be strictly positive on the boundary");
    if (lo <= 1.0 && hi >= 1.0) {
        throw InvalidFieldError("gamma must lie entirely below 1 or entirely above 1 (range ["
            + std::to_string(lo) + ", " + std::to_string(hi) + "])");
    }
    GammaBounds b;
    const bool base_above = lo > 1.0;
    b.c0 = base_above ? lo : 1.0 / hi;
    b.c1 = base_above ? hi : 1.0 / lo;
    if (field.inverted()) {
        b.gamma_min = 1.0 / hi;
        b.gamma_max = 1.0 / lo;
        b.regime = base_above ? GammaRegime::below_one : GammaRegime::above_one;
    } else {
        b.gamma_min = lo;
        b.gamma_max = hi;
        b.regime = base_above ? GammaRegime::above_one : GammaRegime::below_one;
    }
    return b;
}

inline GammaBounds gamma_bounds(const GammaField& field, const AnalyticSurface& surface)
{
    switch (field.kind()) {
    case GammaKind::constant:
        return bounds_from_base_range(field, field.offset(), field.offset());
    case GammaKind::affine: {
        const auto [lo, hi] = surface.linear_range(field.direction());
        const double v0 = field.offset() + field.slope() * lo;
        const double v1 = field.offset() + field.slope() * hi;
        return bounds_from_base_range(field, std::min(v0, v1), std::max(v0, v1));
    }
    case GammaKind::per_vertex:
        break;
    }
    throw InvalidFieldError("per-vertex gamma requires a mesh surface");
}

inline double gamma0(const GammaField& field, const Vec3& x) { return field.gamma0(x); }

} // namespace weylab
