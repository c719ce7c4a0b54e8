#include "sabr/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "sabr/analytics.hpp"
#include "sabr/black_scholes.hpp"

namespace sabr {

namespace {

struct ParamDef {
    const char* name;
    double lo, hi;
    double start;
};

// Default search boxes. The published calibrations land on b = 150, a = 15,
// q_rho = 15, nu0 = 1e-4, so the boxes are at least that wide; nu keeps a
// strictly positive floor.
const std::vector<ParamDef>& static_defs() {
    static const std::vector<ParamDef> defs = {
        {"alpha", 1e-4, 2.0, 0.3},
        {"beta", 0.0, 1.0, 1.0},
        {"nu", 1e-4, 10.0, 0.5},
        {"rho", -1.0, 1.0, -0.3},
    };
    return defs;
}

const std::vector<ParamDef>& case1_defs() {
    static const std::vector<ParamDef> defs = {
        {"alpha", 1e-4, 2.0, 0.3},
        {"beta", 0.0, 1.0, 1.0},
        {"rho0", -1.0, 1.0, -0.3},
        {"nu0", 1e-4, 10.0, 0.5},
        {"a", 0.0, 150.0, 0.1},
        {"b", 0.0, 150.0, 0.1},
    };
    return defs;
}

const std::vector<ParamDef>& case2_defs() {
    static const std::vector<ParamDef> defs = {
        {"alpha", 1e-4, 2.0, 0.3},
        {"beta", 0.0, 1.0, 1.0},
        {"rho0", -1.0, 1.0, -0.3},
        {"q_rho", -15.0, 15.0, 0.0},
        {"d_rho", -1.0, 1.0, 0.0},
        {"nu0", 1e-4, 10.0, 0.5},
        {"q_nu", -15.0, 15.0, 0.0},
        {"d_nu", -1.0, 1.0, 0.0},
        {"a", 0.0, 150.0, 0.1},
        {"b", 0.0, 150.0, 0.1},
    };
    return defs;
}

// Search-vector <-> named-parameter packing with fixed parameters removed
// from the search.
struct ParamSpace {
    std::vector<ParamDef> defs;        // effective (bounds applied)
    std::vector<std::size_t> free_ix;  // indices into defs
    std::vector<double> fixed_values;  // full-length, valid where !is_free
    std::vector<bool> is_free;

    ParamSpace(const std::vector<ParamDef>& base, const BoundsOverrides& bounds,
               const FixedParams& fixed, double alpha_start) {
        defs = base;
        for (auto& d : defs) {
            if (auto it = bounds.find(d.name); it != bounds.end()) {
                if (!(it->second.first < it->second.second))
                    throw std::domain_error(std::string("bounds for ") + d.name +
                                            ": lower must be below upper");
                d.lo = it->second.first;
                d.hi = it->second.second;
            }
            if (std::string(d.name) == "alpha" && alpha_start > 0)
                d.start = std::clamp(alpha_start, d.lo, d.hi);
        }
        for (const auto& [name, range] : bounds) {
            (void)range;
            if (std::none_of(defs.begin(), defs.end(),
                             [&](const ParamDef& d) { return name == d.name; }))
                throw std::domain_error("unknown bounds parameter: " + name);
        }
        for (const auto& [name, value] : fixed) {
            if (std::none_of(defs.begin(), defs.end(),
                             [&](const ParamDef& d) { return name == d.name; }))
                throw std::domain_error("unknown fixed parameter: " + name);
        }
        fixed_values.resize(defs.size(), 0.0);
        is_free.resize(defs.size(), true);
        for (std::size_t i = 0; i < defs.size(); ++i) {
            if (auto it = fixed.find(defs[i].name); it != fixed.end()) {
                is_free[i] = false;
                fixed_values[i] = it->second;
            } else {
                free_ix.push_back(i);
            }
        }
    }

    std::vector<double> full(std::span<const double> x) const {
        std::vector<double> out(defs.size());
        std::size_t j = 0;
        for (std::size_t i = 0; i < defs.size(); ++i)
            out[i] = is_free[i] ? x[j++] : fixed_values[i];
        return out;
    }

    SearchSpace search_space(std::function<bool(std::span<const double>)> full_feasible) const {
        SearchSpace s;
        for (std::size_t i : free_ix) {
            s.lower.push_back(defs[i].lo);
            s.upper.push_back(defs[i].hi);
        }
        if (full_feasible)
            s.feasible = [this, ff = std::move(full_feasible)](std::span<const double> x) {
                const auto p = full(x);
                return ff(p);
            };
        return s;
    }

    std::vector<double> start_point() const {
        std::vector<double> x;
        for (std::size_t i : free_ix)
            x.push_back(std::clamp(defs[i].start, defs[i].lo, defs[i].hi));
        return x;
    }

    std::map<std::string, double> named(std::span<const double> full_params) const {
        std::map<std::string, double> m;
        for (std::size_t i = 0; i < defs.size(); ++i) m[defs[i].name] = full_params[i];
        return m;
    }
};

double atm_vol_guess(const VolSurface& surface, std::size_t slice) {
    const double fwd = surface.forward(slice);
    const auto& quotes = surface.slices[slice].quotes;
    double best = quotes.front().vol, dist = std::abs(quotes.front().strike - fwd);
    for (const auto& q : quotes)
        if (std::abs(q.strike - fwd) < dist) {
            dist = std::abs(q.strike - fwd);
            best = q.vol;
        }
    return best;
}

CaseIIParams case2_from(std::span<const double> v, double horizon) {
    return CaseIIParams{.alpha = v[0], .beta = v[1], .rho0 = v[2], .q_rho = v[3],
                        .d_rho = v[4], .nu0 = v[5], .q_nu = v[6], .d_nu = v[7],
                        .a = v[8], .b = v[9], .horizon = horizon};
}

bool case2_feasible(std::span<const double> v, double horizon) {
    try {
        case2_from(v, horizon).validate();
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

void fill_aggregates(CalibrationReport& report) {
    double sum = 0.0, mx = 0.0;
    for (const auto& row : report.rows) {
        sum += row.rel_error;
        mx = std::max(mx, row.rel_error);
    }
    report.mean_rel_error = report.rows.empty() ? 0.0 : sum / report.rows.size();
    report.max_rel_error = mx;
}

void fill_rows(CalibrationReport& report, const VolSurface& surface,
               const ModelEval& model_eval,
               const std::vector<std::vector<double>>* market_override) {
    for (std::size_t i = 0; i < surface.slices.size(); ++i) {
        const auto& slice = surface.slices[i];
        for (std::size_t j = 0; j < slice.quotes.size(); ++j) {
            const double market = market_override ? (*market_override)[i][j]
                                                  : slice.quotes[j].vol;
            const double model = model_eval(slice.quotes[j].strike, slice.maturity);
            report.rows.push_back({slice.maturity, slice.quotes[j].strike, market,
                                   model, std::abs(market - model) / market});
        }
    }
    fill_aggregates(report);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Shared calibration driver: skips the annealer entirely when every
// parameter is fixed (evaluation-only mode).
AnnealResult run_or_evaluate(const Objective& objective, const ParamSpace& ps,
                             const AnnealingSchedule& schedule,
                             std::function<bool(std::span<const double>)> feasible,
                             const std::vector<double>* start_override) {
    if (ps.free_ix.empty()) {
        AnnealResult r;
        r.best_point = {};
        r.best_value = objective({});
        r.evals = 1;
        return r;
    }
    const SearchSpace space = ps.search_space(std::move(feasible));
    auto start = start_override ? *start_override : ps.start_point();
    return minimize(objective, space, schedule, start);
}

}  // namespace

double VolSurface::forward(std::size_t slice) const {
    const auto& s = slices.at(slice);
    return forward_price(spot, s.rate, s.dividend, s.maturity);
}

std::size_t VolSurface::total_quotes() const {
    std::size_t n = 0;
    for (const auto& s : slices) n += s.quotes.size();
    return n;
}

void VolSurface::validate() const {
    if (spot <= 0) throw std::domain_error("VolSurface: spot must be positive");
    if (slices.empty()) throw std::domain_error("VolSurface: no slices");
    for (std::size_t i = 0; i < slices.size(); ++i) {
        const auto& s = slices[i];
        if (s.maturity <= 0) throw std::domain_error("VolSurface: maturity must be positive");
        if (i > 0 && s.maturity <= slices[i - 1].maturity)
            throw std::domain_error("VolSurface: maturities must be strictly increasing");
        if (s.quotes.empty())
            throw std::domain_error("VolSurface: empty quote block in slice " +
                                    std::to_string(i));
        for (std::size_t j = 0; j < s.quotes.size(); ++j) {
            if (s.quotes[j].strike <= 0 || s.quotes[j].vol <= 0)
                throw std::domain_error("VolSurface: strikes and vols must be positive");
            if (j > 0 && s.quotes[j].strike <= s.quotes[j - 1].strike)
                throw std::domain_error("VolSurface: strikes must be strictly increasing");
        }
    }
}

double cost_individual(const VolSurface& surface, std::size_t slice,
                       const ModelEval& model_eval,
                       const std::vector<std::vector<double>>* market_override) {
    const auto& s = surface.slices.at(slice);
    double sum = 0.0;
    for (std::size_t j = 0; j < s.quotes.size(); ++j) {
        const double market =
            market_override ? (*market_override)[slice][j] : s.quotes[j].vol;
        if (market == 0) throw std::domain_error("cost: zero market value");
        const double model = model_eval(s.quotes[j].strike, s.maturity);
        const double rel = (market - model) / market;
        sum += rel * rel;
    }
    return sum;
}

double cost_joint(const VolSurface& surface, const ModelEval& model_eval,
                  const std::vector<std::vector<double>>* market_override) {
    double sum = 0.0;
    for (std::size_t i = 0; i < surface.slices.size(); ++i)
        sum += cost_individual(surface, i, model_eval, market_override);
    return sum;
}

std::vector<std::vector<double>> market_prices(const VolSurface& surface) {
    std::vector<std::vector<double>> prices;
    for (const auto& s : surface.slices) {
        std::vector<double> row;
        for (const auto& q : s.quotes)
            row.push_back(black_scholes_call(surface.spot, q.strike, s.rate,
                                             s.dividend, s.maturity, q.vol));
        prices.push_back(std::move(row));
    }
    return prices;
}

CalibrationReport calibrate_static_T1(const VolSurface& surface, std::size_t slice,
                                      const BoundsOverrides& bounds,
                                      const AnnealingSchedule& schedule,
                                      const FixedParams& fixed) {
    surface.validate();
    const auto t0 = Clock::now();
    const ParamSpace ps(static_defs(), bounds, fixed, atm_vol_guess(surface, slice));
    if (surface.slices.at(slice).quotes.size() < ps.free_ix.size())
        throw std::domain_error("calibrate_static_T1: fewer quotes than free parameters");
    const double fwd = surface.forward(slice);

    const auto objective = [&](std::span<const double> x) {
        const auto v = ps.full(x);
        const StaticSabrParams p{v[0], v[1], v[2], v[3]};
        return cost_individual(surface, slice, [&](double strike, double T) {
            return static_implied_vol(p, strike, fwd, T);
        });
    };
    const auto result = run_or_evaluate(objective, ps, schedule, nullptr, nullptr);

    CalibrationReport report{.model = "static", .technique = "T_I", .quantity = "vol"};
    const auto best = ps.full(result.best_point);
    const StaticSabrParams p{best[0], best[1], best[2], best[3]};
    report.params = ps.named(best);
    report.final_cost = result.best_value;
    report.evals = result.evals;
    report.seed = schedule.seed;
    // Rows for the calibrated slice only; the other slices are not fitted.
    VolSurface one{surface.spot, {surface.slices[slice]}};
    fill_rows(report, one, [&](double strike, double T) {
        return static_implied_vol(p, strike, fwd, T);
    }, nullptr);
    report.wall_seconds = seconds_since(t0);
    return report;
}

CalibrationReport calibrate_dynamic_case1_T1(const VolSurface& surface,
                                             const BoundsOverrides& bounds,
                                             const AnnealingSchedule& schedule,
                                             const FixedParams& fixed) {
    surface.validate();
    if (surface.slices.size() < 2)
        throw std::domain_error("calibrate_dynamic_case1_T1: need at least two slices");
    const auto t0 = Clock::now();
    const ParamSpace ps(case1_defs(), bounds, fixed, atm_vol_guess(surface, 0));

    std::vector<double> forwards;
    for (std::size_t i = 0; i < surface.slices.size(); ++i)
        forwards.push_back(surface.forward(i));

    const auto model_cost = [&](const CaseIParams& p) {
        double sum = 0.0;
        for (std::size_t i = 0; i < surface.slices.size(); ++i) {
            const auto coeffs = dyn_coeffs_case1(p, surface.slices[i].maturity);
            sum += cost_individual(surface, i, [&](double strike, double T) {
                return dynamic_implied_vol(coeffs, p.alpha, p.beta, strike,
                                           forwards[i], T);
            });
        }
        return sum;
    };
    const auto objective = [&](std::span<const double> x) {
        const auto v = ps.full(x);
        return model_cost(CaseIParams{v[0], v[1], v[2], v[3], v[4], v[5]});
    };
    const auto result = run_or_evaluate(objective, ps, schedule, nullptr, nullptr);

    const auto best = ps.full(result.best_point);
    const CaseIParams p{best[0], best[1], best[2], best[3], best[4], best[5]};
    CalibrationReport report = evaluate_case1(surface, p);
    report.params = ps.named(best);
    report.final_cost = result.best_value;
    report.evals = result.evals;
    report.seed = schedule.seed;
    report.wall_seconds = seconds_since(t0);
    return report;
}

CalibrationReport evaluate_case1(const VolSurface& surface, const CaseIParams& p) {
    surface.validate();
    CalibrationReport report{.model = "case1", .technique = "T_I", .quantity = "vol"};
    report.params = {{"alpha", p.alpha}, {"beta", p.beta}, {"rho0", p.rho0},
                     {"nu0", p.nu0},     {"a", p.a},       {"b", p.b}};
    for (std::size_t i = 0; i < surface.slices.size(); ++i) {
        const double fwd = surface.forward(i);
        const auto coeffs = dyn_coeffs_case1(p, surface.slices[i].maturity);
        VolSurface one{surface.spot, {surface.slices[i]}};
        CalibrationReport part;
        fill_rows(part, one, [&](double strike, double T) {
            return dynamic_implied_vol(coeffs, p.alpha, p.beta, strike, fwd, T);
        }, nullptr);
        report.rows.insert(report.rows.end(), part.rows.begin(), part.rows.end());
    }
    fill_aggregates(report);
    report.final_cost = cost_joint(surface, [&](double strike, double T) {
        for (std::size_t i = 0; i < surface.slices.size(); ++i)
            if (surface.slices[i].maturity == T) {
                const auto coeffs = dyn_coeffs_case1(p, T);
                return dynamic_implied_vol(coeffs, p.alpha, p.beta, strike,
                                           surface.forward(i), T);
            }
        throw std::logic_error("evaluate_case1: unknown maturity");
    });
    return report;
}

namespace {

// One T_II objective evaluation: Monte Carlo price of every quote under a
// shared per-slice path set, against cached Black-Scholes market prices.
double case2_mc_cost(const VolSurface& surface, const CaseIIParams& p,
                     const mc::SimulationPlan& plan,
                     const std::vector<std::vector<double>>& market) {
    const auto model = mc::ModelDynamics::from_case2(p);
    double sum = 0.0;
    for (std::size_t i = 0; i < surface.slices.size(); ++i) {
        const auto& s = surface.slices[i];
        std::vector<double> strikes;
        for (const auto& q : s.quotes) strikes.push_back(q.strike);
        const auto estimates = mc::price_european_batch(
            model, surface.spot, strikes, s.rate, s.dividend, s.maturity, plan);
        for (std::size_t j = 0; j < estimates.size(); ++j) {
            const double rel = (market[i][j] - estimates[j].value) / market[i][j];
            sum += rel * rel;
        }
    }
    return sum;
}

}  // namespace

CalibrationReport evaluate_case2_prices(const VolSurface& surface,
                                        const CaseIIParams& p,
                                        const mc::SimulationPlan& plan) {
    surface.validate();
    CalibrationReport report{.model = "case2", .technique = "T_II", .quantity = "price"};
    report.params = {{"alpha", p.alpha}, {"beta", p.beta},   {"rho0", p.rho0},
                     {"q_rho", p.q_rho}, {"d_rho", p.d_rho}, {"nu0", p.nu0},
                     {"q_nu", p.q_nu},   {"d_nu", p.d_nu},   {"a", p.a},
                     {"b", p.b}};
    report.seed = plan.seed;
    const auto market = market_prices(surface);
    const auto model = mc::ModelDynamics::from_case2(p);
    for (std::size_t i = 0; i < surface.slices.size(); ++i) {
        const auto& s = surface.slices[i];
        std::vector<double> strikes;
        for (const auto& q : s.quotes) strikes.push_back(q.strike);
        const auto estimates = mc::price_european_batch(
            model, surface.spot, strikes, s.rate, s.dividend, s.maturity, plan);
        for (std::size_t j = 0; j < strikes.size(); ++j)
            report.rows.push_back(
                {s.maturity, strikes[j], market[i][j], estimates[j].value,
                 std::abs(market[i][j] - estimates[j].value) / market[i][j]});
    }
    fill_aggregates(report);
    report.final_cost = 0.0;
    for (const auto& row : report.rows)
        report.final_cost += row.rel_error * row.rel_error;
    return report;
}

CalibrationReport calibrate_case2_T2(const VolSurface& surface,
                                     const BoundsOverrides& bounds,
                                     const AnnealingSchedule& schedule,
                                     const mc::SimulationPlan& plan,
                                     const FixedParams& fixed,
                                     const std::optional<mc::SimulationPlan>& report_plan,
                                     const std::vector<double>* start_override) {
    surface.validate();
    plan.validate();
    const auto t0 = Clock::now();
    const double horizon = surface.slices.back().maturity;
    const ParamSpace ps(case2_defs(), bounds, fixed, atm_vol_guess(surface, 0));
    const auto market = market_prices(surface);

    const auto objective = [&](std::span<const double> x) {
        return case2_mc_cost(surface, case2_from(ps.full(x), horizon), plan, market);
    };
    const auto feasible = [&](std::span<const double> full) {
        return case2_feasible(full, horizon);
    };
    const auto result = run_or_evaluate(objective, ps, schedule, feasible, start_override);

    const auto best = ps.full(result.best_point);
    CalibrationReport report = evaluate_case2_prices(
        surface, case2_from(best, horizon), report_plan.value_or(plan));
    report.params = ps.named(best);
    report.final_cost = result.best_value;
    report.evals = result.evals;
    report.seed = schedule.seed;
    report.wall_seconds = seconds_since(t0);
    return report;
}

CalibrationReport calibrate_case2_formula(const VolSurface& surface,
                                          const BoundsOverrides& bounds,
                                          const AnnealingSchedule& schedule,
                                          const FixedParams& fixed) {
    surface.validate();
    const auto t0 = Clock::now();
    const double horizon = surface.slices.back().maturity;
    const ParamSpace ps(case2_defs(), bounds, fixed, atm_vol_guess(surface, 0));
    const auto market = market_prices(surface);

    std::vector<double> forwards;
    for (std::size_t i = 0; i < surface.slices.size(); ++i)
        forwards.push_back(surface.forward(i));

    const auto objective = [&](std::span<const double> x) {
        const auto p = case2_from(ps.full(x), horizon);
        double sum = 0.0;
        for (std::size_t i = 0; i < surface.slices.size(); ++i) {
            const auto& s = surface.slices[i];
            // 8 quadrature nodes per panel resolve eta2^2 to ~1e-6 relative
            // even at the stiffest calibrated decay rates; plenty for a
            // search objective that is evaluated hundreds of thousands of
            // times.
            const auto coeffs = dyn_coeffs_case2(p, s.maturity, 8);
            for (std::size_t j = 0; j < s.quotes.size(); ++j) {
                const double vol =
                    dynamic_implied_vol(coeffs, p.alpha, p.beta,
                                        s.quotes[j].strike, forwards[i], s.maturity);
                if (!(vol > 0)) return 1e10;  // formula left its validity range
                const double price = black_scholes_call(
                    surface.spot, s.quotes[j].strike, s.rate, s.dividend,
                    s.maturity, vol);
                const double rel = (market[i][j] - price) / market[i][j];
                sum += rel * rel;
            }
        }
        return sum;
    };
    const auto feasible = [&](std::span<const double> full) {
        return case2_feasible(full, horizon);
    };
    const auto result = run_or_evaluate(objective, ps, schedule, feasible, nullptr);

    const auto best = ps.full(result.best_point);
    CalibrationReport report{.model = "case2", .technique = "T_I", .quantity = "price"};
    report.params = ps.named(best);
    report.final_cost = result.best_value;
    report.evals = result.evals;
    report.seed = schedule.seed;
    report.wall_seconds = seconds_since(t0);
    return report;
}

double estimate_beta_loglog(const std::vector<std::pair<double, double>>& history) {
    if (history.size() < 2)
        throw std::domain_error("estimate_beta_loglog: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(history.size());
    for (const auto& [fwd, atm_vol] : history) {
        if (fwd <= 0 || atm_vol <= 0)
            throw std::domain_error("estimate_beta_loglog: inputs must be positive");
        const double x = std::log(fwd), y = std::log(atm_vol);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-12 * std::max(1.0, sxx * n))
        throw std::domain_error("estimate_beta_loglog: degenerate regression (all forwards equal)");
    const double slope = (n * sxy - sx * sy) / denom;
    return std::clamp(1.0 + slope, 0.0, 1.0);
}

double estimate_alpha_atm(double beta, double forward, double atm_vol) {
    if (forward <= 0 || atm_vol <= 0)
        throw std::domain_error("estimate_alpha_atm: inputs must be positive");
    return std::pow(forward, 1.0 - beta) * atm_vol;
}

}  // namespace sabr
