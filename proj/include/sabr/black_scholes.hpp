#pragma once

namespace sabr {

/// Dividend-adjusted European call, spot e^{-yT} Phi(d1) - K e^{-rT} Phi(d2).
/// vol = 0 returns the discounted intrinsic value.
double black_scholes_call(double spot, double strike, double rate, double dividend,
                          double maturity, double vol);

/// Inverts black_scholes_call in vol by a bisection-safeguarded Newton solve,
/// to absolute tolerance 1e-10 in price. The price must lie strictly between
/// the no-arbitrage bounds.
double implied_vol_from_price(double price, double spot, double strike, double rate,
                              double dividend, double maturity);

}  // namespace sabr
