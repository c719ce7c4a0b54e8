#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sabr/analytics.hpp"
#include "sabr/types.hpp"

using namespace sabr;

namespace {
constexpr double kStrikePcts[] = {0.80, 0.82, 0.84, 0.86, 0.88, 0.90, 0.92,
                                  0.94, 0.96, 0.98, 1.00, 1.02, 1.04, 1.06,
                                  1.08, 1.10, 1.12, 1.14, 1.16, 1.18, 1.20};
constexpr double kMaturities[] = {0.25, 0.5, 1.0, 2.0};
}  // namespace

TEST_CASE("forward price") {
    CHECK(forward_price(2311.1, 0.010832, 0.019317, 1.0) ==
          doctest::Approx(2311.1 * std::exp(-0.008485)).epsilon(1e-12));
    CHECK(forward_price(100.0, 0.02, 0.02, 5.0) == doctest::Approx(100.0));
    CHECK(forward_price(1.2939, 0.013696, 0.005894, 0.2528) ==
          doctest::Approx(1.2939 * std::exp(0.007802 * 0.2528)).epsilon(1e-12));
    CHECK_THROWS_AS(forward_price(-1.0, 0.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(forward_price(100.0, 0.0, 0.0, 0.0), std::domain_error);
}

TEST_CASE("static implied vol: degenerate cases") {
    // nu = 0 removes every smile term.
    const StaticSabrParams flat{0.3, 1.0, 0.0, 0.0};
    for (double k : {50.0, 100.0, 180.0})
        CHECK(static_implied_vol(flat, k, 100.0, 1.5) == doctest::Approx(0.3).epsilon(1e-14));

    // ATM collapse: sigma = (1/omega)(1 + B*T) exactly.
    const StaticSabrParams p{0.298999, 1.0, 0.382558, -1.0};
    const double f = 2291.5, T = 0.75;
    const double omega = std::pow(f, 1.0 - p.beta) / p.alpha;
    const double B = (1 - p.beta) * (1 - p.beta) / (24 * omega * omega) +
                     p.beta * p.rho * p.nu / (4 * omega) +
                     (2 - 3 * p.rho * p.rho) * p.nu * p.nu / 24;
    CHECK(static_implied_vol(p, f, f, T) ==
          doctest::Approx((1.0 + B * T) / omega).epsilon(1e-15));

    CHECK_THROWS_AS(static_implied_vol(p, -1.0, f, T), std::domain_error);
}

TEST_CASE("static implied vol: EUR/USD 3-month smile stays near market") {
    // Calibrated 3-month parameters against the quoted smile; the published
    // fit plots within one vol point of every quote.
    const StaticSabrParams p{0.146859, 1.0, 0.911966, -0.447718};
    const double f = forward_price(1.2939, 0.013696, 0.005894, 0.2528);
    const double strikes[] = {1.1075, 1.1516, 1.1817, 1.2075, 1.2262, 1.2425, 1.2570,
                              1.2704, 1.2830, 1.2950, 1.3066, 1.3183, 1.3302, 1.3427,
                              1.3563, 1.3715, 1.3899, 1.4140, 1.4510};
    const double vols[] = {19.27, 18.58, 17.93, 16.85, 16.40, 16.00, 15.62,
                           15.28, 14.97, 14.70, 14.46, 14.25, 14.07, 13.93,
                           13.83, 13.75, 13.74, 13.80, 13.89};
    for (int i = 0; i < 19; ++i) {
        const double v = 100.0 * static_implied_vol(p, strikes[i], f, 0.2528);
        CHECK(std::abs(v - vols[i]) < 1.0);
    }
}

TEST_CASE("dynamic reduces to static for constant parameters") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        StaticSabrParams p{0.05 + 0.6 * u(gen), u(gen), 0.05 + u(gen),
                           -0.99 + 1.9 * u(gen)};
        const CaseIParams d{p.alpha, p.beta, p.rho, p.nu, 0.0, 0.0};
        const double f = 2000.0 + 600.0 * u(gen);
        for (double T : kMaturities) {
            const auto c = dyn_coeffs_case1(d, T);
            for (double pct : kStrikePcts) {
                const double k = pct * f;
                const double s = static_implied_vol(p, k, f, T);
                const double dv = dynamic_implied_vol(c, p.alpha, p.beta, k, f, T);
                CHECK(std::abs(dv - s) / s < 1e-12);
            }
        }
    }
}

TEST_CASE("case1 coefficients match quadrature of the defining integrals") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        CaseIParams p{0.3, 1.0, -0.99 + 1.9 * u(gen), 0.05 + 2.0 * u(gen),
                      0.0, 0.0};
        // Include near-zero decay rates, where the closed forms are 0/0.
        if (trial % 3 == 0) {
            p.a = 1e-7 * u(gen);
            p.b = 1e-7 * u(gen);
        } else {
            p.a = 3.0 * u(gen);
            p.b = 3.0 * u(gen);
        }
        const auto got = dyn_coeffs_case1(p, 1.0);
        const auto want = oracle::coefficients(p, 1.0);
        CHECK(std::abs(got.nu1_sq - want.nu1_sq) / want.nu1_sq < 1e-8);
        CHECK(std::abs(got.nu2_sq - want.nu2_sq) / want.nu2_sq < 1e-8);
        CHECK(std::abs(got.eta1 - want.eta1) / std::abs(want.eta1) < 1e-8);
        CHECK(std::abs(got.eta2_sq - want.eta2_sq) / want.eta2_sq < 1e-8);
    }
}

TEST_CASE("case1 constant-parameter limits") {
    const CaseIParams p{0.3, 1.0, -0.7, 0.4, 0.0, 0.0};
    const auto c = dyn_coeffs_case1(p, 1.3);
    CHECK(c.nu1_sq == doctest::Approx(0.16).epsilon(1e-12));
    CHECK(c.nu2_sq == doctest::Approx(0.16).epsilon(1e-12));
    CHECK(c.eta1 == doctest::Approx(-0.28).epsilon(1e-12));
    CHECK(c.eta2_sq == doctest::Approx(0.28 * 0.28).epsilon(1e-12));
}

TEST_CASE("case1 series and closed-form branches join smoothly") {
    // The closed forms are 0/0 at zero decay; a series takes over below a
    // switch threshold. Scan bT through the crossover and compare against
    // quadrature on both sides.
    const double T = 1.0;
    for (double x = 0.18; x < 0.35; x += 0.004) {
        const CaseIParams p{0.3, 1.0, -0.8, 0.5, 0.4 * x, x};
        const auto got = dyn_coeffs_case1(p, T);
        const auto want = oracle::coefficients(p, T);
        CHECK(std::abs(got.nu1_sq - want.nu1_sq) / want.nu1_sq < 1e-9);
        CHECK(std::abs(got.nu2_sq - want.nu2_sq) / want.nu2_sq < 1e-9);
        CHECK(std::abs(got.eta1 - want.eta1) / std::abs(want.eta1) < 1e-9);
        CHECK(std::abs(got.eta2_sq - want.eta2_sq) / want.eta2_sq < 1e-9);
    }
}

TEST_CASE("case2 degenerates to case1") {
    const CaseIParams c1{0.3, 1.0, -0.6, 0.8, 0.9, 1.7};
    const CaseIIParams c2{0.3, 1.0, -0.6, 0.0, 0.0, 0.8, 0.0, 0.0, 0.9, 1.7, 2.0};
    for (double T : kMaturities) {
        const auto a = dyn_coeffs_case1(c1, T);
        const auto b = dyn_coeffs_case2(c2, T);
        CHECK(std::abs(a.nu1_sq - b.nu1_sq) / a.nu1_sq < 1e-10);
        CHECK(std::abs(a.nu2_sq - b.nu2_sq) / a.nu2_sq < 1e-10);
        CHECK(std::abs(a.eta1 - b.eta1) / std::abs(a.eta1) < 1e-10);
        CHECK(std::abs(a.eta2_sq - b.eta2_sq) / a.eta2_sq < 1e-10);
    }
}

TEST_CASE("case2 constant-functions case") {
    const CaseIIParams p{0.3, 1.0, -0.5, 0.0, -0.1, 0.7, 0.0, 0.2, 0.0, 0.0, 2.0};
    const auto c = dyn_coeffs_case2(p, 1.0);
    const double nu = 0.9, rho = -0.6;  // nu0 + d_nu, rho0 + d_rho
    CHECK(c.nu1_sq == doctest::Approx(nu * nu).epsilon(1e-10));
    CHECK(c.nu2_sq == doctest::Approx(nu * nu).epsilon(1e-10));
    CHECK(c.eta1 == doctest::Approx(nu * rho).epsilon(1e-10));
    CHECK(c.eta2_sq == doctest::Approx(nu * nu * rho * rho).epsilon(1e-10));
}

TEST_CASE("case2 coefficients match brute-force quadrature on fitted parameter sets") {
    // The two published joint calibrations, including the stiff one with
    // decay rate 150.
    const CaseIIParams sets[] = {
        {0.296790, 1.0, -0.360610, 15.0, -0.715716, 0.000100, -8.969205, 0.847244,
         15.0, 15.0, 2.0},
        {0.154037, 1.0, -0.693682, 0.345973, -0.200342, 7.541424, -0.992551,
         0.339807, 0.0, 150.0, 2.0},
    };
    const double maturities[] = {0.2438, 0.4959, 1.0, 2.0};
    for (const auto& p : sets) {
        for (double T : maturities) {
            const auto got = dyn_coeffs_case2(p, T);
            const auto want = oracle::coefficients(p, T, 8192);
            CHECK(std::abs(got.nu1_sq - want.nu1_sq) / want.nu1_sq < 1e-6);
            CHECK(std::abs(got.nu2_sq - want.nu2_sq) / want.nu2_sq < 1e-6);
            CHECK(std::abs(got.eta1 - want.eta1) / std::abs(want.eta1) < 1e-6);
            CHECK(std::abs(got.eta2_sq - want.eta2_sq) / want.eta2_sq < 1e-6);
        }
    }
}

TEST_CASE("case2 quadrature convergence under node doubling") {
    const CaseIIParams sets[] = {
        {0.296790, 1.0, -0.360610, 15.0, -0.715716, 0.000100, -8.969205, 0.847244,
         15.0, 15.0, 2.0},
        {0.154037, 1.0, -0.693682, 0.345973, -0.200342, 7.541424, -0.992551,
         0.339807, 0.0, 150.0, 2.0},
        {0.3, 0.9, -0.5, 1.0, 0.1, 0.8, -0.4, 0.3, 2.0, 4.0, 2.0},
    };
    for (const auto& p : sets)
        for (double T : {0.2438, 1.0, 2.0}) {
            const double v64 = dyn_coeffs_case2(p, T, 64).eta2_sq;
            const double v128 = dyn_coeffs_case2(p, T, 128).eta2_sq;
            CHECK(std::abs(v128 - v64) / v64 < 1e-8);
        }
}

TEST_CASE("coefficient positivity") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const CaseIParams p{0.3, 1.0, -1.0 + 2.0 * u(gen), 0.01 + 2.0 * u(gen),
                            5.0 * u(gen), 5.0 * u(gen)};
        for (double T : kMaturities) {
            const auto c = dyn_coeffs_case1(p, T);
            CHECK(c.nu1_sq >= 0.0);
            CHECK(c.nu2_sq >= 0.0);
            CHECK(c.eta2_sq >= 0.0);
        }
    }
}

TEST_CASE("case2 infeasible parameters are rejected with the violating time") {
    // rho(t) exceeds 1 immediately.
    const CaseIIParams bad{0.3, 1.0, 0.9, 0.0, 0.3, 0.5, 0.0, 0.0, 0.0, 0.0, 2.0};
    CHECK_THROWS_AS(dyn_coeffs_case2(bad, 1.0), constraint_error);
    // nu(t) goes negative once the linear term dominates.
    const CaseIIParams bad2{0.3, 1.0, -0.5, 0.0, 0.0, 0.1, -1.0, 0.0, 0.0, 0.0, 2.0};
    CHECK_THROWS_AS(dyn_coeffs_case2(bad2, 2.0), constraint_error);
}

TEST_CASE("dynamic implied vol reproduces the published joint-fit vol tables") {
    struct Row {
        double maturity, strike_pct_or_abs, want;
    };
    SUBCASE("equity surface") {
        const CaseIParams p{0.294722, 1.0, -1.0, 0.388539, 0.001, 0.131466};
        const double spot = 2311.1;
        const double rates[4][3] = {{0.2438, 0.014198, 0.015620},
                                    {0.4959, 0.012413, 0.029769},
                                    {1.0, 0.010832, 0.019317},
                                    {2.0, 0.010394, 0.018610}};
        const double pct[3] = {0.88, 1.00, 1.12};
        const double want[4][3] = {{31.7628, 29.2166, 27.1094},
                                   {31.3150, 28.8068, 26.7345},
                                   {30.7756, 28.3187, 26.2941},
                                   {29.6026, 27.2549, 25.3308}};
        for (int i = 0; i < 4; ++i) {
            const double T = rates[i][0];
            const double f = forward_price(spot, rates[i][1], rates[i][2], T);
            const auto c = dyn_coeffs_case1(p, T);
            for (int j = 0; j < 3; ++j) {
                const double v =
                    100.0 * dynamic_implied_vol(c, p.alpha, p.beta, pct[j] * spot, f, T);
                CHECK(std::abs(v - want[i][j]) < 1e-3);
            }
        }
    }
    SUBCASE("fx surface") {
        const CaseIParams p{0.155464, 0.971908, -0.642617, 0.800275, 0.001, 2.6093};
        const double spot = 1.2939;
        const double rates[4][3] = {{0.2528, 0.013696, 0.005894},
                                    {0.5083, 0.012110, 0.006185},
                                    {1.0, 0.010832, 0.006907},
                                    {2.0, 0.010394, 0.007438}};
        const double strikes[4][3] = {{1.2075, 1.2950, 1.3715},
                                      {1.1700, 1.2975, 1.4099},
                                      {1.1240, 1.3043, 1.4673},
                                      {1.0746, 1.3161, 1.5485}};
        const double want[4][3] = {{17.0683, 15.4197, 14.3171},
                                   {17.4751, 15.3398, 14.0914},
                                   {17.6324, 15.2020, 14.0396},
                                   {17.3887, 15.1075, 14.2853}};
        for (int i = 0; i < 4; ++i) {
            const double T = rates[i][0];
            const double f = forward_price(spot, rates[i][1], rates[i][2], T);
            const auto c = dyn_coeffs_case1(p, T);
            for (int j = 0; j < 3; ++j) {
                const double v = 100.0 * dynamic_implied_vol(c, p.alpha, p.beta,
                                                             strikes[i][j], f, T);
                CHECK(std::abs(v - want[i][j]) < 1e-3);
            }
        }
    }
}
