#include "sabr/black_scholes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sabr {

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double black_scholes_call(double spot, double strike, double rate, double dividend,
                          double maturity, double vol) {
    if (spot <= 0 || strike <= 0 || maturity <= 0)
        throw std::domain_error("black_scholes_call: spot, strike, maturity must be positive");
    if (vol < 0) throw std::domain_error("black_scholes_call: vol must be nonnegative");

    const double df_div = spot * std::exp(-dividend * maturity);
    const double df_k = strike * std::exp(-rate * maturity);
    if (vol == 0.0) return std::max(df_div - df_k, 0.0);

    const double sd = vol * std::sqrt(maturity);
    const double d1 =
        (std::log(spot / strike) + (rate - dividend + 0.5 * vol * vol) * maturity) / sd;
    const double d2 = d1 - sd;
    return df_div * norm_cdf(d1) - df_k * norm_cdf(d2);
}

double implied_vol_from_price(double price, double spot, double strike, double rate,
                              double dividend, double maturity) {
    const double lower = black_scholes_call(spot, strike, rate, dividend, maturity, 0.0);
    const double upper = spot * std::exp(-dividend * maturity);
    if (price <= lower || price >= upper)
        throw std::domain_error("implied_vol_from_price: price outside no-arbitrage bounds");

    double lo = 0.0, hi = 1.0;
    while (black_scholes_call(spot, strike, rate, dividend, maturity, hi) < price)
        hi *= 2.0;

    constexpr double kTol = 1e-10;
    double vol = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double v = black_scholes_call(spot, strike, rate, dividend, maturity, vol);
        const double diff = v - price;
        if (std::abs(diff) < kTol) return vol;
        if (diff > 0)
            hi = vol;
        else
            lo = vol;
        // Newton step on vega, bisection fallback when it leaves the bracket.
        const double sd = vol * std::sqrt(maturity);
        const double d1 = (std::log(spot / strike) +
                           (rate - dividend + 0.5 * vol * vol) * maturity) / sd;
        const double vega =
            spot * std::exp(-dividend * maturity) * norm_pdf(d1) * std::sqrt(maturity);
        double next = vol - diff / vega;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        vol = next;
    }
    return vol;
}

}  // namespace sabr
