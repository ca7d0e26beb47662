#pragma once

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace weylab {

/// Constants of the three eigenvalue regions. Defaults are configuration.
struct RegionParams {
    double lambda_c0 = 2.0;    ///< C0 >= 1 and C0 >= 2 C2
    double lambda_c2 = 1.0;    ///< C2 > 0
    double eps_scale = 1.0;    ///< C_eps > 0
    double eps_power = 0.25;   ///< eps in (0, 1/2)
    double rm_scale = 1.0;     ///< C_M > 0
    double rm_power = 2.0;     ///< M >= 2

    void validate() const
    {
        if (!(lambda_c2 > 0.0)) throw PreconditionError("C2 must be positive");
        if (!(lambda_c0 >= 1.0)) throw PreconditionError("C0 must be >= 1");
        if (!(lambda_c0 >= 2.0 * lambda_c2)) throw PreconditionError("C0 must be >= 2 C2");
        if (!(eps_scale > 0.0)) throw PreconditionError("C_eps must be positive");
        if (!(eps_power > 0.0 && eps_power < 0.5)) throw PreconditionError("eps must lie in (0, 1/2)");
        if (!(rm_scale > 0.0)) throw PreconditionError("C_M must be positive");
        if (!(rm_power >= 2.0)) throw PreconditionError("M must be >= 2");
    }
};

// Closed sets: equality counts as membership. NaN input is never a member.

inline bool in_Lambda(std::complex<double> z, const RegionParams& p)
{
    const double x = z.real(), y = std::abs(z.imag());
    return x <= -p.lambda_c0 && y <= p.lambda_c2 / ((1.0 + std::abs(x)) * (1.0 + std::abs(x)));
}

inline bool in_Lambda_eps(std::complex<double> z, const RegionParams& p)
{
    const double x = z.real(), y = std::abs(z.imag());
    return x < 0.0 && std::abs(x) <= p.eps_scale * (1.0 + std::pow(y, 0.5 + p.eps_power));
}

inline bool in_R_M(std::complex<double> z, const RegionParams& p)
{
    const double x = z.real(), y = std::abs(z.imag());
    return x < 0.0 && y <= p.rm_scale * std::pow(1.0 + std::abs(x), -p.rm_power);
}

/// 1 / max(gamma_0 - 1, sqrt(gamma_0 - 1)).
inline double bound_c0(double gamma0)
{
    if (!(gamma0 > 1.0)) throw DomainError("bound_c0 needs gamma_0 > 1");
    const double d = gamma0 - 1.0;
    return 1.0 / std::max(d, std::sqrt(d));
}

} // namespace weylab
