#pragma once

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cstddef>
#include <vector>

namespace weylab {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule with `order` nodes on [-1, 1], nodes ascending.
inline QuadratureRule gauss_legendre(int order)
{
    QuadratureRule rule;
    const auto positive = boost::math::legendre_p_zeros<double>(order);
    auto push = [&](double x) {
        const double dp = boost::math::legendre_p_prime(order, x);
        rule.nodes.push_back(x);
        rule.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
    };
    for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
        if (*it != 0.0) push(-*it);
    }
    for (double x : positive) push(x);
    return rule;
}

/// Composite Gauss-Legendre rule on [a, b] with `panels` equal panels.
inline QuadratureRule composite_gauss_legendre(double a, double b, int order, int panels)
{
    const QuadratureRule ref = gauss_legendre(order);
    QuadratureRule rule;
    rule.nodes.reserve(ref.nodes.size() * static_cast<std::size_t>(panels));
    rule.weights.reserve(rule.nodes.capacity());
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
            rule.nodes.push_back(lo + 0.5 * width * (ref.nodes[i] + 1.0));
            rule.weights.push_back(0.5 * width * ref.weights[i]);
        }
    }
    return rule;
}

} // namespace weylab
