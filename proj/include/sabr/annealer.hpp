#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "sabr/rng.hpp"

namespace sabr {

/// Geometric cooling schedule for the synchronous parallel annealer.
/// `workers` logical chains per group run a Metropolis walk of length
/// `chain_length` at each temperature level; `groups` adds a second
/// reduction level on top.
struct AnnealingSchedule {
    double t0 = 10.0;
    double cooling = 0.95;
    int chain_length = 100;
    int workers = 8;
    int groups = 1;
    double t_min = 1e-5;
    long max_evals = 1'000'000;
    std::uint64_t seed = 0;
    int omp_threads = 1;  // physical threads used to run the logical chains

    void validate() const;
};

/// Box-bounded domain with an optional extra feasibility predicate.
/// Infeasible proposals are rejected before the objective is evaluated.
struct SearchSpace {
    std::vector<double> lower;
    std::vector<double> upper;
    std::function<bool(std::span<const double>)> feasible;  // may be empty

    bool contains(std::span<const double> x) const;
    bool is_feasible(std::span<const double> x) const;
    void validate() const;
};

struct AnnealResult {
    std::vector<double> best_point;
    double best_value;
    long evals;
    std::vector<std::pair<double, double>> temperature_trace;  // (T, incumbent)
};

using Objective = std::function<double(std::span<const double>)>;

/// Synchronous parallel simulated annealing: every chain restarts each
/// temperature level from the globally reduced incumbent. Deterministic for a
/// fixed schedule regardless of how chains are mapped onto threads.
AnnealResult minimize(const Objective& objective, const SearchSpace& space,
                      const AnnealingSchedule& schedule,
                      const std::vector<double>& start);

/// Temperature-scaled uniform box step with reflection at the bounds:
/// each coordinate moves by uniform(-s_i, s_i) with
/// s_i = (upper_i - lower_i) * min(1, temperature / t0).
std::vector<double> propose(std::span<const double> current, double temperature,
                            const SearchSpace& space, double t0, Xoshiro256pp& rng);

}  // namespace sabr
