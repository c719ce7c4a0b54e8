#pragma once

#include <cstdint>
#include <vector>

#include "sabr/types.hpp"

namespace sabr::mc {

/// Monte Carlo run description. Results are a pure function of
/// (num_paths, dt, seed, block_size); the worker count only affects speed.
struct SimulationPlan {
    std::size_t num_paths = 1u << 20;
    double dt = 1.0 / 250.0;
    std::uint64_t seed = 0;
    int workers = 1;
    std::size_t block_size = 4096;  // paths per RNG substream

    void validate() const;
};

enum class ModelVariant { Static, CaseI, CaseII };

/// SABR dynamics used by the path simulator: beta plus the functional
/// parameters nu(t), rho(t). nu = 0 is accepted (degenerate lognormal mode
/// used by the closed-form test oracle).
class ModelDynamics {
public:
    static ModelDynamics from_static(const StaticSabrParams& p);
    static ModelDynamics from_case1(const CaseIParams& p);
    static ModelDynamics from_case2(const CaseIIParams& p);

    ModelVariant variant() const { return variant_; }
    double beta() const { return beta_; }
    double alpha0() const { return alpha0_; }
    double nu_at(double t) const;
    double rho_at(double t) const;

private:
    ModelVariant variant_;
    double beta_;
    double alpha0_;
    StaticSabrParams static_{};
    CaseIParams case1_{};
    CaseIIParams case2_{};
};

struct PriceEstimate {
    double value;
    double std_error;  // sample std of the discounted payoff / sqrt(num_paths)
    std::size_t num_paths;
};

/// Forward-starting return strip with local and global clamps.
struct CliquetSpec {
    double local_floor;
    double local_cap;
    double global_floor;
    double global_cap;
    std::vector<double> reset_dates;  // ascending, last is the maturity

    void validate() const;
};

/// Log-Euler simulation of terminal forwards F_T, one per path.
std::vector<double> simulate_terminals(const ModelDynamics& model, double forward0,
                                       double alpha0, double maturity,
                                       const SimulationPlan& plan);

PriceEstimate price_european_call(const ModelDynamics& model, double spot,
                                  double strike, double rate, double dividend,
                                  double maturity, const SimulationPlan& plan);

/// All strikes priced from one shared path set.
std::vector<PriceEstimate> price_european_batch(const ModelDynamics& model,
                                                double spot,
                                                const std::vector<double>& strikes,
                                                double rate, double dividend,
                                                double maturity,
                                                const SimulationPlan& plan);

PriceEstimate price_cliquet(const ModelDynamics& model, double spot, double rate,
                            double dividend, const CliquetSpec& spec,
                            const SimulationPlan& plan);

namespace reference {

/// Plain single-loop serial simulator, kept as the oracle for the OpenMP
/// kernel: must produce bit-identical output for any plan.
std::vector<double> simulate_terminals(const ModelDynamics& model, double forward0,
                                       double alpha0, double maturity,
                                       const SimulationPlan& plan);

}  // namespace reference

}  // namespace sabr::mc
