#pragma once

#include <stdexcept>
#include <string>

namespace sabr {

/// Thrown when a Case II parameter set violates rho(t) in [-1,1] or nu(t) > 0
/// somewhere on the feasibility grid. Carries the first violating time.
class constraint_error : public std::runtime_error {
public:
    constraint_error(std::string msg, double t_violation)
        : std::runtime_error(std::move(msg)), t(t_violation) {}
    double t;
};

/// Constant-parameter SABR: dF = a_t F^beta dW1, da_t = nu a_t dW2,
/// corr(dW1,dW2) = rho.
struct StaticSabrParams {
    double alpha;  // volatility reference level, > 0
    double beta;   // variance elasticity, in [0,1]
    double nu;     // vol-of-vol, >= 0
    double rho;    // correlation, in [-1,1]

    void validate() const;
};

/// Time-dependent SABR with exponentially decaying functional parameters:
///   rho(t) = rho0 exp(-a t),  nu(t) = nu0 exp(-b t).
struct CaseIParams {
    double alpha;
    double beta;
    double rho0;   // in [-1,1]
    double nu0;    // > 0
    double a;      // correlation decay rate, >= 0
    double b;      // vol-of-vol decay rate, >= 0

    double rho_at(double t) const;
    double nu_at(double t) const;
    void validate() const;
};

/// General functional parameters with linear-times-exponential terms and
/// asymptotes:
///   rho(t) = (rho0 + q_rho t) exp(-a t) + d_rho,
///   nu(t)  = (nu0  + q_nu  t) exp(-b t) + d_nu.
/// Feasibility (rho in [-1,1], nu > 0) is only guaranteed after validate(),
/// which checks a grid on (0, horizon] plus the stationary points.
struct CaseIIParams {
    double alpha;
    double beta;
    double rho0, q_rho, d_rho;
    double nu0, q_nu, d_nu;
    double a, b;
    double horizon;  // max maturity over which feasibility is enforced

    double rho_at(double t) const;
    double nu_at(double t) const;
    void validate() const;  // throws constraint_error with the violating t
};

/// The four maturity-dependent coefficient functionals of the dynamic SABR
/// implied-volatility expansion, evaluated at one maturity.
struct DynCoefficients {
    double nu1_sq;
    double nu2_sq;
    double eta1;
    double eta2_sq;
};

}  // namespace sabr
