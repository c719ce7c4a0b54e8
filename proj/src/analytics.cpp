#include "sabr/analytics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "sabr/quadrature.hpp"

namespace sabr {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::domain_error(msg);
}

// Scaled Case I coefficient functions of x = decay*T, normalized so f(0) = 1.
// Below kXSwitch the printed closed forms lose significance by cancellation,
// so a frozen Taylor expansion is used instead.
constexpr double kXSwitch = 0.25;

constexpr std::array<double, 14> kSeriesNu1 = {
    1.0, -1.0 / 4, 1.0 / 20, -1.0 / 120, 1.0 / 840, -1.0 / 6720, 1.0 / 60480,
    -1.0 / 604800, 1.0 / 6652800, -1.0 / 79833600, 1.0 / 1037836800,
    -1.0 / 14529715200, 1.0 / 217945728000, -1.0 / 3487131648000};
constexpr std::array<double, 14> kSeriesNu2 = {
    1.0, -1.0 / 2, 3.0 / 20, -1.0 / 30, 1.0 / 168, -1.0 / 1120, 1.0 / 8640,
    -1.0 / 75600, 1.0 / 739200, -1.0 / 7983360, 1.0 / 94348800,
    -1.0 / 1210809600, 1.0 / 16765056000, -1.0 / 249080832000};
constexpr std::array<double, 14> kSeriesEta1 = {
    1.0, -1.0 / 3, 1.0 / 12, -1.0 / 60, 1.0 / 360, -1.0 / 2520, 1.0 / 20160,
    -1.0 / 181440, 1.0 / 1814400, -1.0 / 19958400, 1.0 / 239500800,
    -1.0 / 3113510400, 1.0 / 43589145600, -1.0 / 653837184000};
constexpr std::array<double, 14> kSeriesEta2 = {
    1.0, -3.0 / 5, 7.0 / 30, -1.0 / 14, 31.0 / 1680, -1.0 / 240,
    127.0 / 151200, -17.0 / 110880, 73.0 / 2851200, -31.0 / 7862400,
    2047.0 / 3632428800, -1.0 / 13305600, 8191.0 / 871782912000,
    -5461.0 / 4940103168000};

double horner(const std::array<double, 14>& c, double x) {
    double acc = 0.0;
    for (int i = 13; i >= 0; --i) acc = acc * x + c[i];
    return acc;
}

double f_nu1(double x) {
    if (x < kXSwitch) return horner(kSeriesNu1, x);
    return 6.0 / (x * x * x) * (x * x / 2 - x + 1 - std::exp(-x));
}

double f_nu2(double x) {
    if (x < kXSwitch) return horner(kSeriesNu2, x);
    const double e = std::exp(-x);
    return 6.0 / (x * x * x) * (2 * (e - 1) + x * (e + 1));
}

double f_eta1(double x) {
    if (x < kXSwitch) return horner(kSeriesEta1, x);
    return 2.0 / (x * x) * (std::exp(-x) - (1 - x));
}

double f_eta2(double x) {
    if (x < kXSwitch) return horner(kSeriesEta2, x);
    const double e = std::exp(-x);
    return 3.0 / (x * x * x * x) * (e * e - 8 * e + 7 + 2 * x * (x - 3));
}

// Small dense polynomials in t, coefficient order c[0] + c[1] t + ...
using Poly = std::vector<double>;

Poly poly_mul(const Poly& p, const Poly& q) {
    Poly r(p.size() + q.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
    return r;
}

// integral over [0,T] of P(t) exp(-k t) dt
double integrate_poly_exp(const Poly& p, double k, double T) {
    std::array<double, 8> mom{};
    detail::exp_moments(k, T, std::span<double>(mom.data(), p.size()));
    double sum = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) sum += p[n] * mom[n];
    return sum;
}

struct ExpPiece {
    double k;
    Poly poly;
};

// nu^2(t) and (nu rho)(t) as sums of polynomial * exp(-k t) pieces.
std::vector<ExpPiece> case2_nu_sq_pieces(const CaseIIParams& p) {
    const Poly nu_lin{p.nu0, p.q_nu};
    return {{2 * p.b, poly_mul(nu_lin, nu_lin)},
            {p.b, {2 * p.d_nu * p.nu0, 2 * p.d_nu * p.q_nu}},
            {0.0, {p.d_nu * p.d_nu}}};
}

std::vector<ExpPiece> case2_nurho_pieces(const CaseIIParams& p) {
    const Poly nu_lin{p.nu0, p.q_nu};
    const Poly rho_lin{p.rho0, p.q_rho};
    return {{p.a + p.b, poly_mul(nu_lin, rho_lin)},
            {p.b, {p.d_rho * p.nu0, p.d_rho * p.q_nu}},
            {p.a, {p.d_nu * p.rho0, p.d_nu * p.q_rho}},
            {0.0, {p.d_nu * p.d_rho}}};
}

double integrate_pieces(const std::vector<ExpPiece>& pieces, const Poly& weight,
                        double T) {
    double sum = 0.0;
    for (const auto& piece : pieces)
        sum += integrate_poly_exp(poly_mul(weight, piece.poly), piece.k, T);
    return sum;
}

}  // namespace

void StaticSabrParams::validate() const {
    require(alpha > 0, "StaticSabrParams: alpha must be positive");
    require(beta >= 0 && beta <= 1, "StaticSabrParams: beta must be in [0,1]");
    require(nu >= 0, "StaticSabrParams: nu must be nonnegative");
    require(rho >= -1 && rho <= 1, "StaticSabrParams: rho must be in [-1,1]");
}

double CaseIParams::rho_at(double t) const { return rho0 * std::exp(-a * t); }
double CaseIParams::nu_at(double t) const { return nu0 * std::exp(-b * t); }

void CaseIParams::validate() const {
    require(alpha > 0, "CaseIParams: alpha must be positive");
    require(beta >= 0 && beta <= 1, "CaseIParams: beta must be in [0,1]");
    require(rho0 >= -1 && rho0 <= 1, "CaseIParams: rho0 must be in [-1,1]");
    require(nu0 > 0, "CaseIParams: nu0 must be positive");
    require(a >= 0 && b >= 0, "CaseIParams: decay rates must be nonnegative");
}

double CaseIIParams::rho_at(double t) const {
    return (rho0 + q_rho * t) * std::exp(-a * t) + d_rho;
}
double CaseIIParams::nu_at(double t) const {
    return (nu0 + q_nu * t) * std::exp(-b * t) + d_nu;
}

void CaseIIParams::validate() const {
    require(alpha > 0, "CaseIIParams: alpha must be positive");
    require(beta >= 0 && beta <= 1, "CaseIIParams: beta must be in [0,1]");
    require(a >= 0 && b >= 0, "CaseIIParams: decay rates must be nonnegative");
    require(horizon > 0, "CaseIIParams: horizon must be positive");

    // Uniform grid on (0, horizon] plus the interior stationary points of
    // rho(t) and nu(t): for (c0 + q t) e^{-kt}, t* = 1/k - c0/q.
    constexpr int kGrid = 256;
    std::vector<double> ts;
    ts.reserve(kGrid + 2);
    for (int i = 1; i <= kGrid; ++i) ts.push_back(horizon * i / kGrid);
    if (a > 0 && q_rho != 0) {
        const double t_star = 1.0 / a - rho0 / q_rho;
        if (t_star > 0 && t_star <= horizon) ts.push_back(t_star);
    }
    if (b > 0 && q_nu != 0) {
        const double t_star = 1.0 / b - nu0 / q_nu;
        if (t_star > 0 && t_star <= horizon) ts.push_back(t_star);
    }
    constexpr double kTol = 1e-9;
    for (double t : ts) {
        const double r = rho_at(t);
        if (r < -1 - kTol || r > 1 + kTol)
            throw constraint_error(
                "CaseIIParams: rho(t) outside [-1,1] at t = " + std::to_string(t), t);
        if (nu_at(t) <= 0)
            throw constraint_error(
                "CaseIIParams: nu(t) not positive at t = " + std::to_string(t), t);
    }
}

double forward_price(double spot, double rate, double dividend, double maturity) {
    require(spot > 0, "forward_price: spot must be positive");
    require(maturity > 0, "forward_price: maturity must be positive");
    return spot * std::exp((rate - dividend) * maturity);
}

double static_implied_vol(const StaticSabrParams& p, double strike, double forward,
                          double maturity) {
    p.validate();
    require(strike > 0, "static_implied_vol: strike must be positive");
    require(forward > 0, "static_implied_vol: forward must be positive");
    require(maturity > 0, "static_implied_vol: maturity must be positive");

    const double one_m_beta = 1.0 - p.beta;
    const double omega = std::pow(forward, one_m_beta) / p.alpha;
    const double rnw = p.rho * p.nu * omega;
    const double nw = p.nu * omega;

    const double a1 = -0.5 * (one_m_beta - rnw);
    const double a2 = (one_m_beta * one_m_beta + 3.0 * (one_m_beta - rnw) +
                       (2.0 - 3.0 * p.rho * p.rho) * nw * nw) /
                      12.0;
    const double b = one_m_beta * one_m_beta / (24.0 * omega * omega) +
                     p.beta * p.rho * p.nu / (4.0 * omega) +
                     (2.0 - 3.0 * p.rho * p.rho) * p.nu * p.nu / 24.0;

    const double log_m = std::log(strike / forward);
    return (1.0 + a1 * log_m + a2 * log_m * log_m + b * maturity) / omega;
}

DynCoefficients dyn_coeffs_case1(const CaseIParams& p, double maturity) {
    p.validate();
    require(maturity > 0, "dyn_coeffs_case1: maturity must be positive");
    const double xb = 2.0 * p.b * maturity;
    const double xab = (p.a + p.b) * maturity;
    const double nn = p.nu0 * p.nu0;
    const double nr = p.nu0 * p.rho0;
    return {nn * f_nu1(xb), nn * f_nu2(xb), nr * f_eta1(xab), nr * nr * f_eta2(xab)};
}

namespace detail {

void exp_moments(double k, double T, std::span<double> out) {
    const double x = k * T;
    if (x < 0.5) {
        // I_n = T^{n+1} sum_m (-x)^m / (m! (n+m+1)); rapid convergence here.
        double tp = T;
        for (std::size_t n = 0; n < out.size(); ++n) {
            double term = 1.0, sum = 1.0 / (n + 1);
            for (int m = 1; m < 30; ++m) {
                term *= -x / m;
                const double contrib = term / (n + m + 1);
                sum += contrib;
                if (std::abs(contrib) < 1e-18 * std::abs(sum)) break;
            }
            out[n] = tp * sum;
            tp *= T;
        }
        return;
    }
    const double e = std::exp(-x);
    out[0] = (1.0 - e) / k;
    double tp = 1.0;
    for (std::size_t n = 1; n < out.size(); ++n) {
        tp *= T;
        out[n] = (n * out[n - 1] - tp * e) / k;
    }
}

double case2_inner_integral(const CaseIIParams& p, double s) {
    double sum = 0.0;
    for (const auto& piece : case2_nurho_pieces(p))
        sum += integrate_poly_exp(piece.poly, piece.k, s);
    return sum;
}

}  // namespace detail

DynCoefficients dyn_coeffs_case2(const CaseIIParams& p, double maturity,
                                 std::size_t quad_nodes) {
    p.validate();
    require(maturity > 0, "dyn_coeffs_case2: maturity must be positive");
    const double T = maturity;
    const double T2 = T * T, T3 = T2 * T, T4 = T3 * T;

    const auto nu_sq = case2_nu_sq_pieces(p);
    const auto nurho = case2_nurho_pieces(p);

    DynCoefficients c;
    c.nu1_sq = 3.0 / T3 * integrate_pieces(nu_sq, {T * T, -2.0 * T, 1.0}, T);
    c.nu2_sq = 6.0 / T3 * integrate_pieces(nu_sq, {0.0, T, -1.0}, T);
    c.eta1 = 2.0 / T2 * integrate_pieces(nurho, {T, -1.0}, T);

    // eta2^2 = 12/T^4 * double integral of G(s)^2, G analytic, nested GL.
    // Large decay rates put a boundary layer at t = 0 that a single panel of
    // practical size cannot resolve, so each axis is split at the layer edge.
    const auto& rule = gauss_legendre(quad_nodes);
    const double rate = std::max(p.a, p.b);
    const double layer = rate > 0 ? 10.0 / rate : T;
    const auto integrate = [&](auto&& f, double hi) {
        const double split = std::min(layer, hi);
        double sum = rule.integrate(f, 0.0, split);
        if (split < hi) sum += rule.integrate(f, split, hi);
        return sum;
    };
    const auto g_sq = [&](double s) {
        const double g = detail::case2_inner_integral(p, s);
        return g * g;
    };
    c.eta2_sq = 12.0 / T4 *
                integrate([&](double t) { return integrate(g_sq, t); }, T);
    return c;
}

double dynamic_implied_vol(const DynCoefficients& c, double alpha, double beta,
                           double strike, double forward, double maturity) {
    require(alpha > 0, "dynamic_implied_vol: alpha must be positive");
    require(strike > 0, "dynamic_implied_vol: strike must be positive");
    require(forward > 0, "dynamic_implied_vol: forward must be positive");
    require(maturity > 0, "dynamic_implied_vol: maturity must be positive");

    const double one_m_beta = 1.0 - beta;
    const double omega = std::pow(forward, one_m_beta) / alpha;
    const double e1w = c.eta1 * omega;

    const double a1 = 0.5 * (beta - 1.0) + 0.5 * e1w;
    const double a2 = one_m_beta * one_m_beta / 12.0 + (one_m_beta - e1w) / 4.0 +
                      (4.0 * c.nu1_sq + 3.0 * (c.eta2_sq - 3.0 * c.eta1 * c.eta1)) *
                          omega * omega / 24.0;
    const double b = one_m_beta * one_m_beta / (24.0 * omega * omega) +
                     beta * c.eta1 / (4.0 * omega) +
                     (2.0 * c.nu2_sq - 3.0 * c.eta2_sq) / 24.0;

    const double log_m = std::log(strike / forward);
    return (1.0 + a1 * log_m + a2 * log_m * log_m + b * maturity) / omega;
}

}  // namespace sabr
