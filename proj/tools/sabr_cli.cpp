// Command-line front end: calibrate, eval, price, smile.
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sabr/analytics.hpp"
#include "sabr/calibration.hpp"
#include "sabr/io.hpp"
#include "sabr/mc.hpp"

namespace {

using nlohmann::json;
using namespace sabr;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> output_dir;
    std::vector<std::string> fixed_overrides;  // k=v
};

void add_common(CLI::App* cmd, CommonFlags& f, bool need_config = true) {
    auto* opt = cmd->add_option("--config", f.config_path, "run configuration JSON");
    if (need_config) opt->required();
    cmd->add_option("--seed", f.seed, "override annealing and simulation seeds");
    cmd->add_option("--workers", f.workers, "override the thread budget");
    cmd->add_option("--output", f.output_dir, "report output directory");
    cmd->add_option("--fixed", f.fixed_overrides,
                    "pin a parameter, e.g. --fixed beta=1 (repeatable)");
}

io::RunConfig load_with_overrides(const CommonFlags& f) {
    io::RunConfig config = io::load_config(f.config_path);
    io::apply_worker_env(config);
    if (f.seed) {
        config.schedule.seed = *f.seed;
        config.plan.seed = *f.seed;
        if (config.report_plan) config.report_plan->seed = *f.seed;
    }
    if (f.workers) {
        config.schedule.omp_threads = *f.workers;
        config.plan.workers = *f.workers;
        if (config.report_plan) config.report_plan->workers = *f.workers;
    }
    if (f.output_dir) config.output_dir = *f.output_dir;
    for (const std::string& kv : f.fixed_overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw io::config_error("--fixed expects name=value, got '" + kv + "'");
        try {
            config.fixed[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw io::config_error("--fixed value is not a number in '" + kv + "'");
        }
    }
    return config;
}

CalibrationReport run_calibration(const io::RunConfig& config) {
    const VolSurface surface = io::parse_surface(config.surface_path);
    if (config.model == "static")
        return calibrate_static_T1(surface, config.slice, config.bounds,
                                   config.schedule, config.fixed);
    if (config.model == "case1")
        return calibrate_dynamic_case1_T1(surface, config.bounds, config.schedule,
                                          config.fixed);
    if (config.technique == "T_I")
        return calibrate_case2_formula(surface, config.bounds, config.schedule,
                                       config.fixed);
    return calibrate_case2_T2(surface, config.bounds, config.schedule, config.plan,
                              config.fixed, config.report_plan);
}

void print_summary(const CalibrationReport& report) {
    std::cout << report.model << " / " << report.technique << " on "
              << report.rows.size() << " quotes\n";
    for (const auto& [name, value] : report.params)
        std::cout << "  " << name << " = " << value << "\n";
    std::cout << "  final_cost     = " << report.final_cost << "\n"
              << "  mean_rel_error = " << report.mean_rel_error << "\n"
              << "  max_rel_error  = " << report.max_rel_error << "\n"
              << "  evals          = " << report.evals << "\n"
              << "  wall_seconds   = " << report.wall_seconds << "\n";
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io::parse_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw io::parse_error(path + ": " + e.what());
    }
}

double need(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key))
        throw io::config_error(where + ": missing '" + key + "'");
    return obj[key].get<double>();
}

/// Parameter files look like {"model": "case1", "params": {"alpha": ..., ...}}.
mc::ModelDynamics load_dynamics(const json& obj, double horizon) {
    const std::string model = obj.value("model", "");
    if (!obj.contains("params")) throw io::config_error("params file: missing 'params'");
    const json& p = obj["params"];
    if (model == "static")
        return mc::ModelDynamics::from_static(
            {need(p, "alpha", model), need(p, "beta", model), need(p, "nu", model),
             need(p, "rho", model)});
    if (model == "case1")
        return mc::ModelDynamics::from_case1(
            {need(p, "alpha", model), need(p, "beta", model), need(p, "rho0", model),
             need(p, "nu0", model), need(p, "a", model), need(p, "b", model)});
    if (model == "case2") {
        CaseIIParams c{need(p, "alpha", model), need(p, "beta", model),
                       need(p, "rho0", model), need(p, "q_rho", model),
                       need(p, "d_rho", model), need(p, "nu0", model),
                       need(p, "q_nu", model), need(p, "d_nu", model),
                       need(p, "a", model), need(p, "b", model), horizon};
        c.validate();
        return mc::ModelDynamics::from_case2(c);
    }
    throw io::config_error("params file: model must be static, case1 or case2");
}

int cmd_calibrate(const CommonFlags& flags, bool eval_only) {
    io::RunConfig config = load_with_overrides(flags);
    if (eval_only) {
        // Evaluation mode tabulates model vs market; every parameter must be
        // pinned so the annealer never runs.
        static const std::map<std::string, std::vector<std::string>> names = {
            {"static", {"alpha", "beta", "nu", "rho"}},
            {"case1", {"alpha", "beta", "rho0", "nu0", "a", "b"}},
            {"case2",
             {"alpha", "beta", "rho0", "q_rho", "d_rho", "nu0", "q_nu", "d_nu", "a",
              "b"}},
        };
        for (const auto& name : names.at(config.model))
            if (!config.fixed.count(name))
                throw io::config_error("eval mode: parameter '" + name +
                                       "' is not fixed");
    }
    const CalibrationReport report = run_calibration(config);
    print_summary(report);
    io::write_report(report, config.output_dir + "/report_" + report.model + "_" +
                                 report.technique);
    return io::kExitOk;
}

int cmd_price(const CommonFlags& flags, const std::string& params_path,
              const std::string& contract_path) {
    std::optional<io::RunConfig> config;
    if (!flags.config_path.empty()) config = load_with_overrides(flags);
    mc::SimulationPlan plan = config ? config->plan : mc::SimulationPlan{};
    if (!config) {
        if (flags.seed) plan.seed = *flags.seed;
        if (flags.workers) plan.workers = *flags.workers;
    }

    const json contract = load_json_file(contract_path);
    const std::string type = contract.value("type", "");
    const double spot = need(contract, "spot", "contract");
    const double rate = need(contract, "rate", "contract");
    const double dividend = need(contract, "dividend", "contract");

    double horizon;
    if (type == "european")
        horizon = need(contract, "maturity", "contract");
    else if (type == "cliquet") {
        if (!contract.contains("reset_dates"))
            throw io::config_error("contract: missing 'reset_dates'");
        horizon = contract["reset_dates"].back().get<double>();
    } else
        throw io::config_error("contract: type must be european or cliquet");

    const auto model = load_dynamics(load_json_file(params_path), horizon);
    const auto t0 = std::chrono::steady_clock::now();
    mc::PriceEstimate estimate;
    if (type == "european") {
        estimate = mc::price_european_call(model, spot,
                                           need(contract, "strike", "contract"), rate,
                                           dividend, horizon, plan);
    } else {
        mc::CliquetSpec spec{need(contract, "local_floor", "contract"),
                             need(contract, "local_cap", "contract"),
                             need(contract, "global_floor", "contract"),
                             need(contract, "global_cap", "contract"),
                             contract["reset_dates"].get<std::vector<double>>()};
        estimate = mc::price_cliquet(model, spot, rate, dividend, spec, plan);
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << io::price_to_json(estimate, type, plan.seed, plan.dt, wall);
    return io::kExitOk;
}

int cmd_smile(const CommonFlags& flags, const std::string& params_path,
              const std::string& surface_path, int grid,
              const std::string& out_path) {
    const VolSurface surface = io::parse_surface(surface_path);
    const json params = load_json_file(params_path);
    const std::string model = params.value("model", "");
    const double horizon = surface.slices.back().maturity;

    std::ostringstream out;
    out << "maturity,strike,vol\n";
    for (std::size_t i = 0; i < surface.slices.size(); ++i) {
        const auto& slice = surface.slices[i];
        const double fwd = surface.forward(i);
        std::vector<double> strikes;
        if (grid <= 0) {
            for (const auto& q : slice.quotes) strikes.push_back(q.strike);
        } else {
            const double lo = slice.quotes.front().strike;
            const double hi = slice.quotes.back().strike;
            for (int j = 0; j < grid; ++j)
                strikes.push_back(grid == 1 ? lo : lo + (hi - lo) * j / (grid - 1));
        }
        for (const double strike : strikes) {
            double vol;
            const json& p = params.at("params");
            if (model == "static") {
                vol = static_implied_vol({need(p, "alpha", model), need(p, "beta", model),
                                          need(p, "nu", model), need(p, "rho", model)},
                                         strike, fwd, slice.maturity);
            } else if (model == "case1") {
                const CaseIParams c{need(p, "alpha", model), need(p, "beta", model),
                                    need(p, "rho0", model), need(p, "nu0", model),
                                    need(p, "a", model), need(p, "b", model)};
                vol = dynamic_implied_vol(dyn_coeffs_case1(c, slice.maturity), c.alpha,
                                          c.beta, strike, fwd, slice.maturity);
            } else if (model == "case2") {
                CaseIIParams c{need(p, "alpha", model), need(p, "beta", model),
                               need(p, "rho0", model), need(p, "q_rho", model),
                               need(p, "d_rho", model), need(p, "nu0", model),
                               need(p, "q_nu", model), need(p, "d_nu", model),
                               need(p, "a", model), need(p, "b", model), horizon};
                c.validate();
                vol = dynamic_implied_vol(dyn_coeffs_case2(c, slice.maturity), c.alpha,
                                          c.beta, strike, fwd, slice.maturity);
            } else {
                throw io::config_error("params file: model must be static, case1 or case2");
            }
            out << slice.maturity << "," << strike << "," << vol << "\n";
        }
    }
    if (out_path.empty() || out_path == "-") {
        std::cout << out.str();
    } else {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot write " + out_path);
        f << out.str();
    }
    return io::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SABR volatility toolkit: calibration and Monte Carlo pricing"};
    app.require_subcommand(1);

    CommonFlags cal_flags, eval_flags, price_flags, smile_flags;
    std::string params_path, contract_path, surface_path, smile_out = "-";
    int smile_grid = 0;

    auto* calibrate = app.add_subcommand("calibrate", "fit a model to a surface");
    add_common(calibrate, cal_flags);

    auto* eval = app.add_subcommand("eval", "tabulate model vs market (all params fixed)");
    add_common(eval, eval_flags);

    auto* price = app.add_subcommand("price", "Monte Carlo price one contract");
    add_common(price, price_flags, /*need_config=*/false);
    price->add_option("--params", params_path, "model parameter JSON")->required();
    price->add_option("--contract", contract_path, "contract JSON")->required();

    auto* smile = app.add_subcommand("smile", "emit model implied vols on a grid");
    smile->add_option("--params", params_path, "model parameter JSON")->required();
    smile->add_option("--surface", surface_path, "surface CSV (maturities and strikes)")
        ->required();
    smile->add_option("--grid", smile_grid, "dense strikes per maturity (0 = quotes)");
    smile->add_option("--out", smile_out, "output CSV path ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the usage message
        return sabr::io::kExitConfig;
    }

    try {
        if (calibrate->parsed()) return cmd_calibrate(cal_flags, false);
        if (eval->parsed()) return cmd_calibrate(eval_flags, true);
        if (price->parsed()) return cmd_price(price_flags, params_path, contract_path);
        return cmd_smile(smile_flags, params_path, surface_path, smile_grid, smile_out);
    } catch (const sabr::io::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return sabr::io::kExitConfig;
    } catch (const sabr::io::parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return sabr::io::kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return sabr::io::kExitNumerical;
    }
}
