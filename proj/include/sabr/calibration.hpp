#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sabr/annealer.hpp"
#include "sabr/mc.hpp"
#include "sabr/types.hpp"

namespace sabr {

struct VolQuote {
    double strike;
    double vol;
};

struct VolSlice {
    double maturity;
    double rate;
    double dividend;
    std::vector<VolQuote> quotes;
};

/// Calibration target: spot plus per-maturity (rate, dividend, strike/vol
/// quotes). Maturities and strikes must be strictly increasing.
struct VolSurface {
    double spot;
    std::vector<VolSlice> slices;

    double forward(std::size_t slice) const;
    std::size_t total_quotes() const;
    void validate() const;
};

struct ReportRow {
    double maturity;
    double strike;
    double market;
    double model;
    double rel_error;
};

struct CalibrationReport {
    std::string model;      // "static" | "case1" | "case2"
    std::string technique;  // "T_I" | "T_II"
    std::string quantity;   // "vol" | "price" (what the rows compare)
    std::map<std::string, double> params;
    double final_cost;
    std::vector<ReportRow> rows;
    double mean_rel_error;
    double max_rel_error;
    double wall_seconds;
    long evals;
    std::uint64_t seed;
};

/// Model evaluator used by the cost functions: (strike, maturity) -> value in
/// the same quantity as the market data (vol or price).
using ModelEval = std::function<double(double strike, double maturity)>;

/// Sum of squared relative errors over one maturity slice. The market values
/// default to the quoted vols; `market_override`, when given, replaces them
/// row-for-row (used for price-space calibration).
double cost_individual(const VolSurface& surface, std::size_t slice,
                       const ModelEval& model_eval,
                       const std::vector<std::vector<double>>* market_override = nullptr);

/// Sum of cost_individual over all slices.
double cost_joint(const VolSurface& surface, const ModelEval& model_eval,
                  const std::vector<std::vector<double>>* market_override = nullptr);

/// Named bounds overrides on top of the built-in defaults.
using BoundsOverrides = std::map<std::string, std::pair<double, double>>;
/// Parameters pinned to a value and excluded from the search.
using FixedParams = std::map<std::string, double>;

/// Individual (one-slice) static SABR calibration on implied vols.
CalibrationReport calibrate_static_T1(const VolSurface& surface, std::size_t slice,
                                      const BoundsOverrides& bounds,
                                      const AnnealingSchedule& schedule,
                                      const FixedParams& fixed = {});

/// Joint Case I calibration on implied vols (asymptotic formula objective).
CalibrationReport calibrate_dynamic_case1_T1(const VolSurface& surface,
                                             const BoundsOverrides& bounds,
                                             const AnnealingSchedule& schedule,
                                             const FixedParams& fixed = {});

/// Joint Case II calibration on prices with a Monte Carlo objective under
/// common random numbers. Market prices are derived once from the quoted vols
/// via Black-Scholes. The report rows are priced with `report_plan` when
/// given (the search itself always uses `plan`).
CalibrationReport calibrate_case2_T2(const VolSurface& surface,
                                     const BoundsOverrides& bounds,
                                     const AnnealingSchedule& schedule,
                                     const mc::SimulationPlan& plan,
                                     const FixedParams& fixed = {},
                                     const std::optional<mc::SimulationPlan>&
                                         report_plan = std::nullopt,
                                     const std::vector<double>* start_override = nullptr);

/// Joint Case II calibration on prices computed with the asymptotic formula
/// (coefficient functionals + Black-Scholes). Cheap; used to warm-start T_II.
CalibrationReport calibrate_case2_formula(const VolSurface& surface,
                                          const BoundsOverrides& bounds,
                                          const AnnealingSchedule& schedule,
                                          const FixedParams& fixed = {});

/// beta from the log-log regression ln(sigma_ATM) = ln(alpha) - (1-beta) ln(f),
/// clipped to [0,1]. `history` holds (forward, atm_vol) pairs.
double estimate_beta_loglog(const std::vector<std::pair<double, double>>& history);

/// alpha ~= f^(1-beta) * sigma_ATM
double estimate_alpha_atm(double beta, double forward, double atm_vol);

/// Market prices from quoted vols via Black-Scholes, aligned with the surface.
std::vector<std::vector<double>> market_prices(const VolSurface& surface);

/// Evaluation-only helpers: tabulate model vs market for fixed parameters.
CalibrationReport evaluate_case1(const VolSurface& surface, const CaseIParams& p);
CalibrationReport evaluate_case2_prices(const VolSurface& surface,
                                        const CaseIIParams& p,
                                        const mc::SimulationPlan& plan);

}  // namespace sabr
