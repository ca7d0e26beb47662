#pragma once

#include "errors.hpp"
#include "surface.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>

namespace weylab {

using Complex = std::complex<double>;
using CVec3 = Eigen::Vector3cd;
using CMat3 = Eigen::Matrix3cd;

inline constexpr Complex kI{0.0, 1.0};

/// A point (x', xi') of the cotangent bundle of the boundary, seen through a
/// chart, together with the pointwise quantities derived from it.
struct CotangentSample {
    Vec2 x;
    Vec2 xi;
    Tangents tangents;
    Mat2 metric;
    Vec3 nu;
    Vec3 beta;
    double r0 = 0.0;

    /// Cometric norm ||xi'||_g.
    double metric_norm() const { return std::sqrt(r0); }
};

/// beta = xi_2 e^2 + xi_3 e^3 with e^k the tangent dual basis
/// (<e^k, ds/dx_j> = delta_kj, <e^k, nu> = 0).
inline Vec3 beta(const Tangents& tangents, const Mat2& metric, const Vec2& xi)
{
    return tangents * metric.inverse() * xi;
}

inline CotangentSample make_sample(const Chart& chart, const Vec2& x, const Vec2& xi)
{
    CotangentSample s;
    s.x = x;
    s.xi = xi;
    s.metric = chart.metric(x);
    s.tangents = chart.tangents(x);
    s.nu = s.tangents.col(0).cross(s.tangents.col(1)).normalized();
    s.beta = beta(s.tangents, s.metric, xi);
    s.r0 = s.beta.dot(s.beta);
    return s;
}

/// Inverse-metric quadratic form sum g^{jk} xi_j xi_k via the explicit 2x2 inverse.
inline double cometric_form(const Mat2& g, const Vec2& xi)
{
    const double det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    return (g(1, 1) * xi[0] * xi[0] - 2.0 * g(0, 1) * xi[0] * xi[1] + g(0, 0) * xi[1] * xi[1]) / det;
}

/// Spectral parameter z = -i (1 + i t)^-1 of the elliptic region.
inline Complex spectral_parameter(double t) { return -kI / (1.0 + kI * t); }

/// Root of xi_1^2 + r0 - z^2 = 0 with Im rho > 0.
inline Complex rho(Complex z, double r0)
{
    const Complex w = z * z - r0;
    Complex root = std::sqrt(w);
    if (root.imag() < 0.0) root = -root;
    if (!(root.imag() > 0.0)) throw BranchError("z^2 - r0 lies on [0, inf): no root with Im rho > 0");
    return root;
}

/// The rank-one symbol B v = <beta, v> beta.
inline Mat3 symbol_B(const Vec3& b) { return b * b.transpose(); }

/// m = (1/z) (rho I + rho^-1 B).
inline CMat3 principal_m(const Vec3& b, Complex z)
{
    const Complex r = rho(z, b.dot(b));
    return (r * CMat3::Identity() + symbol_B(b).cast<Complex>() / r) / z;
}

/// Principal symbol of the H-side boundary operator: m_1 = -m.
inline CMat3 principal_m1(const Vec3& b, Complex z) { return -principal_m(b, z); }

/// Closed form of -m at z = -i: sqrt(1 + r0) I - B / sqrt(1 + r0).
inline Mat3 minus_m_at_minus_i(const Vec3& b)
{
    const double s = std::sqrt(1.0 + b.dot(b));
    return s * Mat3::Identity() - symbol_B(b) / s;
}

/// Orthogonal frame [nu | nu x b | b] with b = beta / sqrt(r0).
inline Mat3 build_U(const Vec3& nu, const Vec3& b)
{
    const double r0 = b.dot(b);
    if (!(r0 > 0.0)) throw PreconditionError("U is undefined for xi' = 0");
    const Vec3 unit = b / std::sqrt(r0);
    Mat3 u;
    u.col(0) = nu;
    u.col(1) = nu.cross(unit);
    u.col(2) = unit;
    return u;
}

struct EigenPair3 {
    double value = 0.0;
    Vec3 vector;
};

/// Eigenpairs of B: (0, nu), (0, nu x beta / |beta|), (r0, beta / |beta|).
inline std::array<EigenPair3, 3> eigenstructure_B(const Vec3& nu, const Vec3& b)
{
    const double r0 = b.dot(b);
    if (!(r0 > 0.0)) throw PreconditionError("eigenstructure of B needs xi' != 0");
    const Vec3 unit = b / std::sqrt(r0);
    return {EigenPair3{0.0, nu}, EigenPair3{0.0, nu.cross(unit)}, EigenPair3{r0, unit}};
}

/// Symbol of sqrt(1 - h^2 Delta)(I - B(h xi) / (1 + h^2 r0)) - gamma_0 I.
inline Mat3 reduced_symbol_p1(const Vec3& b, double h, double gamma0)
{
    const double s2 = 1.0 + h * h * b.dot(b);
    const double s = std::sqrt(s2);
    return s * (Mat3::Identity() - h * h * symbol_B(b) / s2) - gamma0 * Mat3::Identity();
}

/// Diagonal of U^T p_1 U: the double eigenvalue sqrt(1 + h^2 r0) - gamma_0 and the
/// elliptic third entry (1 + h^2 r0)^(-1/2) - gamma_0.
inline Vec3 diagonalized_p1(double r0, double h, double gamma0)
{
    const double s = std::sqrt(1.0 + h * h * r0);
    return Vec3(s - gamma0, s - gamma0, 1.0 / s - gamma0);
}

// ---------------------------------------------------------------------------
// Principal transport amplitudes

/// Bilinear cross product; Eigen's cross conjugates complex results.
inline CVec3 cross(const CVec3& a, const CVec3& b)
{
    return CVec3(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
}

/// Bilinear (non-conjugating) inner product.
inline Complex dot(const CVec3& a, const CVec3& b) { return (a.array() * b.array()).sum(); }

enum class TransportSide {
    electric, ///< boundary data on nu x a, solved for the E amplitude
    magnetic, ///< boundary data on nu x b, z -> -z and a <-> b
};

/// Principal amplitudes a_00, b_00 of the boundary transport system and the
/// residuals of every equation, evaluated from the closed-form solution.
struct TransportPrincipal {
    CVec3 g;
    CVec3 psi0;
    CVec3 a00;
    CVec3 b00;
    CVec3 nu_cross_a00;
    CVec3 nu_cross_b00;
    double boundary_residual = 0.0;    ///< |nu x (data amplitude) - g|
    double system_residual = 0.0;      ///< residual of the second curl equation
    double closed_form_residual = 0.0; ///< |nu x (other amplitude) - closed form|
};

inline TransportPrincipal transport_principal(const Vec3& nu, const Vec3& b, Complex z, const CVec3& g,
    TransportSide side)
{
    const double scale = std::max(1.0, g.norm());
    if (std::abs(dot(nu.cast<Complex>(), g)) > 1e-10 * scale) {
        throw PreconditionError("transport data g must be tangential");
    }
    const Complex r = rho(z, b.dot(b));
    const CVec3 nuc = nu.cast<Complex>();
    const CVec3 bc = b.cast<Complex>();
    const CVec3 nu_g = cross(nuc, g);

    TransportPrincipal t;
    t.g = g;
    t.psi0 = r * nuc - bc;
    // Amplitude carrying the boundary data, and nu x (the other one).
    const CVec3 data_amp = -nu_g + dot(nuc, cross(bc, g)) / r * nuc;
    const CVec3 closed = (r * nu_g + dot(bc, nu_g) / r * bc) / z;

    if (side == TransportSide::electric) {
        // psi0 x a - z b = 0, psi0 x b + z a = 0, nu x a = g.
        t.a00 = data_amp;
        t.b00 = cross(t.psi0, t.a00) / z;
        t.nu_cross_a00 = cross(nuc, t.a00);
        t.nu_cross_b00 = cross(nuc, t.b00);
        t.boundary_residual = (t.nu_cross_a00 - g).norm();
        t.system_residual = (cross(t.psi0, t.b00) + z * t.a00).norm();
        t.closed_form_residual = (t.nu_cross_b00 - closed).norm();
    } else {
        // psi0 x b + z a = 0, psi0 x a - z b = 0, nu x b = g.
        t.b00 = data_amp;
        t.a00 = -cross(t.psi0, t.b00) / z;
        t.nu_cross_a00 = cross(nuc, t.a00);
        t.nu_cross_b00 = cross(nuc, t.b00);
        t.boundary_residual = (t.nu_cross_b00 - g).norm();
        t.system_residual = (cross(t.psi0, t.a00) - z * t.b00).norm();
        t.closed_form_residual = (t.nu_cross_a00 + closed).norm();
    }
    return t;
}

/// Principal symbol applied to a tangential vector f, read off the transport
/// solution: electric side m f = nu x b_00 with nu x g = f; magnetic side
/// m_1 f = -(nu x a_00) with g = nu x f.
inline CVec3 transport_symbol_action(const Vec3& nu, const Vec3& b, Complex z, const CVec3& f, TransportSide side)
{
    const CVec3 nuc = nu.cast<Complex>();
    if (side == TransportSide::electric) {
        const CVec3 g = -cross(nuc, f);
        return transport_principal(nu, b, z, g, side).nu_cross_b00;
    }
    const CVec3 g = cross(nuc, f);
    return -transport_principal(nu, b, z, g, side).nu_cross_a00;
}

} // namespace weylab
