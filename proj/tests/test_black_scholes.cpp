#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "sabr/black_scholes.hpp"

using namespace sabr;

TEST_CASE("price/implied-vol round trip") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double spot = 50.0 + 4000.0 * u(gen);
        const double strike = spot * (0.7 + 0.6 * u(gen));
        const double rate = 0.05 * u(gen);
        const double div = 0.05 * u(gen);
        const double T = 0.1 + 2.0 * u(gen);
        const double vol = 0.05 + 0.5 * u(gen);
        const double price = black_scholes_call(spot, strike, rate, div, T, vol);
        const double iv = implied_vol_from_price(price, spot, strike, rate, div, T);
        CHECK(std::abs(iv - vol) < 1e-8);
    }
}

TEST_CASE("known values") {
    // EUR/USD 12-month slice, at-the-money quote.
    const double p = black_scholes_call(1.2939, 1.2950, 0.013696, 0.005894,
                                        0.2528, 0.1470);
    CHECK(p == doctest::Approx(0.038794).epsilon(2e-5));
    CHECK(implied_vol_from_price(p, 1.2939, 1.2950, 0.013696, 0.005894, 0.2528) ==
          doctest::Approx(0.1470).epsilon(1e-8));

    // Equity-index at-the-money quote, 3-month slice.
    const double p2 = black_scholes_call(2311.1, 2311.1, 0.014198, 0.015620,
                                         0.2438, 0.2979);
    CHECK(p2 == doctest::Approx(134.605).epsilon(2e-5));
}

TEST_CASE("zero vol gives discounted intrinsic value") {
    const double spot = 110.0, strike = 100.0, r = 0.03, y = 0.01, T = 1.5;
    const double intrinsic =
        spot * std::exp(-y * T) - strike * std::exp(-r * T);
    CHECK(black_scholes_call(spot, strike, r, y, T, 0.0) ==
          doctest::Approx(intrinsic).epsilon(1e-14));
    CHECK(black_scholes_call(90.0, 100.0, 0.0, 0.0, 1.0, 0.0) == 0.0);
}

TEST_CASE("monotone in vol and bounded by no-arbitrage limits") {
    const double spot = 100.0, strike = 105.0, r = 0.02, y = 0.01, T = 0.75;
    double prev = black_scholes_call(spot, strike, r, y, T, 0.01);
    for (double v = 0.05; v < 3.0; v += 0.05) {
        const double p = black_scholes_call(spot, strike, r, y, T, v);
        CHECK(p > prev);
        prev = p;
    }
    CHECK(prev < spot * std::exp(-y * T));
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(black_scholes_call(-1, 100, 0, 0, 1, 0.2), std::domain_error);
    CHECK_THROWS_AS(black_scholes_call(100, -1, 0, 0, 1, 0.2), std::domain_error);
    CHECK_THROWS_AS(black_scholes_call(100, 100, 0, 0, -1, 0.2), std::domain_error);
    CHECK_THROWS_AS(black_scholes_call(100, 100, 0, 0, 1, -0.2), std::domain_error);
    // Price outside the no-arbitrage bounds cannot be inverted.
    CHECK_THROWS_AS(implied_vol_from_price(200.0, 100, 100, 0, 0, 1),
                    std::domain_error);
    CHECK_THROWS_AS(implied_vol_from_price(0.0, 100, 50, 0.02, 0, 1),
                    std::domain_error);
}
