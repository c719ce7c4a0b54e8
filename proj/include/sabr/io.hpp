#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sabr/annealer.hpp"
#include "sabr/calibration.hpp"
#include "sabr/mc.hpp"

namespace sabr::io {

/// Malformed input file (surface CSV or parameter JSON). Carries the line
/// number when one is known.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, long line = -1)
        : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")"
                                       : what),
          line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

/// Invalid run configuration (unknown keys, bad bounds, missing fields).
class config_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Process exit codes shared by the CLI and the error classification helper.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitParse = 3,
    kExitNumerical = 4,
};

enum class StrikeMode { Percent, Absolute };

/// Raw, file-shaped view of a surface CSV: strikes, vols and rates exactly as
/// printed in the file (percent units, unresolved strikes).
struct SurfaceFile {
    double spot = 0.0;
    std::string label;
    std::string date;
    StrikeMode strike_mode = StrikeMode::Absolute;
    struct Slice {
        double maturity;
        double rate_pct;
        double dividend_pct;
        std::vector<std::pair<double, double>> quotes;  // (strike, vol %) as printed
    };
    std::vector<Slice> slices;

    VolSurface to_surface() const;
};

SurfaceFile parse_surface_file(const std::string& path);
SurfaceFile parse_surface_text(const std::string& text);
std::string serialize(const SurfaceFile& file);
void write_surface_file(const SurfaceFile& file, const std::string& path);

/// Convenience: parse + convert + validate.
VolSurface parse_surface(const std::string& path);

/// One run of the tool, loaded from JSON. Unknown keys are rejected.
struct RunConfig {
    std::string model;      // "static" | "case1" | "case2"
    std::string technique;  // "T_I" | "T_II"
    std::string surface_path;
    std::size_t slice = 0;  // static calibration target slice
    FixedParams fixed;
    BoundsOverrides bounds;
    AnnealingSchedule schedule;
    mc::SimulationPlan plan;
    std::optional<mc::SimulationPlan> report_plan;
    std::string output_dir = ".";

    void validate() const;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// Applies the worker-budget environment override (SABR_WORKERS) to both the
/// annealing schedule and the simulation plan. Returns the budget if set.
std::optional<int> apply_worker_env(RunConfig& config);

std::string report_to_csv(const CalibrationReport& report);
std::string report_to_json(const CalibrationReport& report);
void write_report(const CalibrationReport& report, const std::string& stem);

std::string price_to_json(const mc::PriceEstimate& estimate, const std::string& label,
                          std::uint64_t seed, double dt, double wall_seconds);

}  // namespace sabr::io
