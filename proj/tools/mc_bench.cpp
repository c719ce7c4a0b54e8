// Compares the serial reference path simulator with the OpenMP kernel and
// checks that they agree bit-for-bit.
#include <chrono>
#include <cstring>
#include <iostream>
#include <string>

#include "sabr/mc.hpp"

namespace {

template <typename F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t num_paths = 1u << 18;
    int max_workers = 8;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--paths") && i + 1 < argc)
            num_paths = std::stoull(argv[++i]);
        else if (!std::strcmp(argv[i], "--max-workers") && i + 1 < argc)
            max_workers = std::stoi(argv[++i]);
        else {
            std::cerr << "usage: mc_bench [--paths N] [--max-workers W]\n";
            return 2;
        }
    }

    const sabr::StaticSabrParams params{0.375162, 0.999999, 0.331441, -0.999999};
    const auto model = sabr::mc::ModelDynamics::from_static(params);
    const double forward0 = 2257.37, maturity = 0.495890;

    sabr::mc::SimulationPlan plan;
    plan.num_paths = num_paths;
    plan.seed = 42;

    std::vector<double> baseline;
    const double t_ref = seconds([&] {
        baseline = sabr::mc::reference::simulate_terminals(model, forward0,
                                                           params.alpha, maturity, plan);
    });
    std::cout << "paths=" << num_paths << "\n";
    std::cout << "serial_reference  " << t_ref << " s\n";

    for (int w = 1; w <= max_workers; w *= 2) {
        plan.workers = w;
        std::vector<double> out;
        const double t = seconds([&] {
            out = sabr::mc::simulate_terminals(model, forward0, params.alpha, maturity,
                                               plan);
        });
        const bool identical = out == baseline;
        std::cout << "openmp workers=" << w << "  " << t << " s  speedup="
                  << t_ref / t << (identical ? "" : "  MISMATCH") << "\n";
        if (!identical) return 1;
    }
    return 0;
}
