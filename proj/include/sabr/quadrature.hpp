#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace sabr {

/// Gauss-Legendre rule on [-1,1]. Nodes/weights are computed once by Newton
/// iteration on the Legendre polynomial and cached per node count.
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendreRule(std::size_t n);

    /// Integrate f over [lo, hi].
    template <class F>
    double integrate(F&& f, double lo, double hi) const {
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            sum += weights[i] * f(mid + half * nodes[i]);
        return half * sum;
    }
};

const GaussLegendreRule& gauss_legendre(std::size_t n);

}  // namespace sabr
