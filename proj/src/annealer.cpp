#include "sabr/annealer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sabr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ChainResult {
    std::vector<double> endpoint;
    double endpoint_value;
    std::vector<double> best_point;  // best evaluated point along the walk
    double best_value;
    long evals;
};

}  // namespace

void AnnealingSchedule::validate() const {
    if (!(t0 > 0)) throw std::domain_error("AnnealingSchedule: t0 must be positive");
    if (!(cooling > 0 && cooling < 1))
        throw std::domain_error("AnnealingSchedule: cooling must be in (0,1)");
    if (chain_length < 1)
        throw std::domain_error("AnnealingSchedule: chain_length must be >= 1");
    if (workers < 1 || groups < 1)
        throw std::domain_error("AnnealingSchedule: workers and groups must be >= 1");
    if (!(t_min > 0 && t_min < t0))
        throw std::domain_error("AnnealingSchedule: need 0 < t_min < t0");
    if (max_evals < 1) throw std::domain_error("AnnealingSchedule: max_evals must be >= 1");
}

bool SearchSpace::contains(std::span<const double> x) const {
    if (x.size() != lower.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < lower[i] || x[i] > upper[i]) return false;
    return true;
}

bool SearchSpace::is_feasible(std::span<const double> x) const {
    return contains(x) && (!feasible || feasible(x));
}

void SearchSpace::validate() const {
    if (lower.empty() || lower.size() != upper.size())
        throw std::domain_error("SearchSpace: bounds must be nonempty and equal-sized");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] < upper[i]))
            throw std::domain_error("SearchSpace: lower must be strictly below upper");
}

std::vector<double> propose(std::span<const double> current, double temperature,
                            const SearchSpace& space, double t0, Xoshiro256pp& rng) {
    const double scale = std::min(1.0, temperature / t0);
    std::vector<double> next(current.begin(), current.end());
    for (std::size_t i = 0; i < next.size(); ++i) {
        const double range = space.upper[i] - space.lower[i];
        const double step = range * scale * (2.0 * rng.uniform() - 1.0);
        double x = next[i] + step;
        // |step| <= range, so one reflection per side suffices.
        if (x > space.upper[i]) x = 2.0 * space.upper[i] - x;
        if (x < space.lower[i]) x = 2.0 * space.lower[i] - x;
        next[i] = std::clamp(x, space.lower[i], space.upper[i]);
    }
    return next;
}

AnnealResult minimize(const Objective& objective, const SearchSpace& space,
                      const AnnealingSchedule& schedule,
                      const std::vector<double>& start) {
    schedule.validate();
    space.validate();
    if (!space.is_feasible(start))
        throw std::domain_error("annealer: start point is infeasible");

    const auto safe_eval = [&](std::span<const double> x) {
        const double v = objective(x);
        return std::isnan(v) ? kInf : v;
    };

    std::vector<double> incumbent = start;
    double incumbent_value = safe_eval(incumbent);
    std::vector<double> best_point = incumbent;
    double best_value = incumbent_value;
    long evals = 1;

    const int n_chains = schedule.workers * schedule.groups;
    AnnealResult result;

    std::uint64_t level = 0;
    for (double temp = schedule.t0; temp >= schedule.t_min;
         temp *= schedule.cooling, ++level) {
        if (evals >= schedule.max_evals) break;
        // Per-chain evaluation allotment keeps the total within
        // max_evals + workers*groups without any cross-chain coupling.
        const long remaining = schedule.max_evals - evals;
        const long eval_cap = (remaining + n_chains - 1) / n_chains;

        std::vector<ChainResult> chains(n_chains);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(schedule.omp_threads)
#endif
        for (int chain = 0; chain < n_chains; ++chain) {
            // Substream key depends on the logical chain index only, so the
            // group layout and the thread mapping cannot change the result.
            Xoshiro256pp rng(schedule.seed,
                             (level << 20) ^ static_cast<std::uint64_t>(chain));
            ChainResult cr{incumbent, incumbent_value, incumbent, incumbent_value, 0};
            std::vector<double> x = incumbent;
            double fx = incumbent_value;
            for (int step = 0; step < schedule.chain_length; ++step) {
                if (cr.evals >= eval_cap) break;
                auto y = propose(x, temp, space, schedule.t0, rng);
                if (!space.is_feasible(y)) continue;  // no objective cost
                const double fy = safe_eval(y);
                ++cr.evals;
                const bool accept =
                    fy <= fx || rng.uniform() < std::exp(-(fy - fx) / temp);
                if (accept) {
                    x = std::move(y);
                    fx = fy;
                    if (fx < cr.best_value) {
                        cr.best_value = fx;
                        cr.best_point = x;
                    }
                }
            }
            cr.endpoint = std::move(x);
            cr.endpoint_value = fx;
            chains[chain] = std::move(cr);
        }

        // Two-level reduction: per-group minimum over chain endpoints, then a
        // cross-group minimum, then keep the prior incumbent if it is better.
        for (int group = 0; group < schedule.groups; ++group) {
            int group_min = group * schedule.workers;
            for (int p = group_min + 1; p < (group + 1) * schedule.workers; ++p)
                if (chains[p].endpoint_value < chains[group_min].endpoint_value)
                    group_min = p;
            if (chains[group_min].endpoint_value < incumbent_value) {
                incumbent_value = chains[group_min].endpoint_value;
                incumbent = chains[group_min].endpoint;
            }
        }
        for (const auto& cr : chains) {
            evals += cr.evals;
            if (cr.best_value < best_value) {
                best_value = cr.best_value;
                best_point = cr.best_point;
            }
        }
        result.temperature_trace.emplace_back(temp, incumbent_value);
    }

    result.best_point = std::move(best_point);
    result.best_value = best_value;
    result.evals = evals;
    return result;
}

}  // namespace sabr
