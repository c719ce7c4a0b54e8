#pragma once

#include <cstddef>
#include <span>

#include "sabr/types.hpp"

namespace sabr {

/// forward = spot * exp((rate - dividend) * maturity)
double forward_price(double spot, double rate, double dividend, double maturity);

/// Obloj-corrected static SABR implied volatility,
///   sigma = (1/w) * (1 + A1 ln(K/f) + A2 ln^2(K/f) + B T),  w = f^(1-beta)/alpha.
double static_implied_vol(const StaticSabrParams& p, double strike, double forward,
                          double maturity);

/// Exact coefficient functionals for Case I exponential-decay parameters.
/// Switches to Taylor series where the closed forms cancel (small decay*T).
DynCoefficients dyn_coeffs_case1(const CaseIParams& p, double maturity);

/// Coefficient functionals for Case II. nu1^2, nu2^2 and eta1 are exact;
/// eta2^2 uses nested Gauss-Legendre quadrature (nodes per axis configurable)
/// over the analytically integrated inner layer.
DynCoefficients dyn_coeffs_case2(const CaseIIParams& p, double maturity,
                                 std::size_t quad_nodes = 64);

/// Dynamic SABR implied volatility from precomputed coefficient functionals.
double dynamic_implied_vol(const DynCoefficients& c, double alpha, double beta,
                           double strike, double forward, double maturity);

namespace detail {

/// Moments I_n = integral of t^n exp(-k t) dt over [0,T], n = 0..out.size()-1.
/// Stable for any k >= 0, including k*T -> 0 (series branch).
void exp_moments(double k, double T, std::span<double> out);

/// Running integral G(s) = integral of nu(u) rho(u) du over [0,s] for Case II.
double case2_inner_integral(const CaseIIParams& p, double s);

}  // namespace detail

}  // namespace sabr
