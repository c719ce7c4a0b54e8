#include "sabr/quadrature.hpp"

#include <map>
#include <mutex>
#include <numbers>

namespace sabr {

GaussLegendreRule::GaussLegendreRule(std::size_t n)
    : nodes(n), weights(n) {
    // Newton iteration on P_n with the Chebyshev-like initial guess.
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
}

const GaussLegendreRule& gauss_legendre(std::size_t n) {
    static std::mutex mtx;
    static std::map<std::size_t, GaussLegendreRule> cache;
    std::lock_guard lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, GaussLegendreRule(n)).first;
    return it->second;
}

}  // namespace sabr
