#include "sabr/io.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sabr::io {

namespace {

using nlohmann::json;

// Shortest representation that round-trips through a double.
std::string fmt(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& token, long line) {
    double value{};
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last)
        throw parse_error("not a number: '" + token + "'", line);
    return value;
}

}  // namespace

VolSurface SurfaceFile::to_surface() const {
    VolSurface surface;
    surface.spot = spot;
    for (const auto& s : slices) {
        VolSlice slice;
        slice.maturity = s.maturity;
        slice.rate = s.rate_pct / 100.0;
        slice.dividend = s.dividend_pct / 100.0;
        for (const auto& [strike, vol_pct] : s.quotes) {
            const double k =
                strike_mode == StrikeMode::Percent ? strike / 100.0 * spot : strike;
            slice.quotes.push_back({k, vol_pct / 100.0});
        }
        surface.slices.push_back(std::move(slice));
    }
    return surface;
}

SurfaceFile parse_surface_text(const std::string& text) {
    SurfaceFile file;
    bool saw_spot = false, saw_mode = false;
    std::istringstream in(text);
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split(line, ',');
        const std::string& key = fields[0];
        if (key == "spot") {
            if (fields.size() != 2) throw parse_error("spot expects one value", lineno);
            file.spot = parse_number(fields[1], lineno);
            saw_spot = true;
        } else if (key == "label") {
            if (fields.size() != 2) throw parse_error("label expects one value", lineno);
            file.label = fields[1];
        } else if (key == "date") {
            if (fields.size() != 2) throw parse_error("date expects one value", lineno);
            file.date = fields[1];
        } else if (key == "strikes") {
            if (fields.size() != 2) throw parse_error("strikes expects one value", lineno);
            if (fields[1] == "percent")
                file.strike_mode = StrikeMode::Percent;
            else if (fields[1] == "absolute")
                file.strike_mode = StrikeMode::Absolute;
            else
                throw parse_error("strikes must be 'percent' or 'absolute'", lineno);
            saw_mode = true;
        } else if (key == "slice") {
            if (fields.size() != 4)
                throw parse_error("slice expects maturity,rate,dividend", lineno);
            file.slices.push_back({parse_number(fields[1], lineno),
                                   parse_number(fields[2], lineno),
                                   parse_number(fields[3], lineno),
                                   {}});
        } else {
            if (fields.size() != 2)
                throw parse_error("quote row expects strike,vol", lineno);
            if (file.slices.empty())
                throw parse_error("quote row before any slice header", lineno);
            file.slices.back().quotes.push_back(
                {parse_number(fields[0], lineno), parse_number(fields[1], lineno)});
        }
    }
    if (!saw_spot) throw parse_error("missing spot header");
    if (!saw_mode) throw parse_error("missing strikes header");
    if (file.slices.empty()) throw parse_error("no slices");
    return file;
}

SurfaceFile parse_surface_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_surface_text(text.str());
}

std::string serialize(const SurfaceFile& file) {
    std::ostringstream out;
    out << "spot," << fmt(file.spot) << "\n";
    out << "label," << file.label << "\n";
    out << "date," << file.date << "\n";
    out << "strikes,"
        << (file.strike_mode == StrikeMode::Percent ? "percent" : "absolute") << "\n";
    for (const auto& s : file.slices) {
        out << "slice," << fmt(s.maturity) << "," << fmt(s.rate_pct) << ","
            << fmt(s.dividend_pct) << "\n";
        for (const auto& [strike, vol] : s.quotes)
            out << fmt(strike) << "," << fmt(vol) << "\n";
    }
    return out.str();
}

void write_surface_file(const SurfaceFile& file, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << serialize(file);
}

VolSurface parse_surface(const std::string& path) {
    VolSurface surface = parse_surface_file(path).to_surface();
    try {
        surface.validate();
    } catch (const std::domain_error& e) {
        throw parse_error(std::string(e.what()) + " in " + path);
    }
    return surface;
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw config_error("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void get_if_present(const json& obj, const char* key, T& out) {
    if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

AnnealingSchedule parse_schedule(const json& obj) {
    reject_unknown(obj,
                   {"t0", "cooling", "chain_length", "workers", "groups", "t_min",
                    "max_evals", "seed", "omp_threads"},
                   "annealing");
    AnnealingSchedule s;
    get_if_present(obj, "t0", s.t0);
    get_if_present(obj, "cooling", s.cooling);
    get_if_present(obj, "chain_length", s.chain_length);
    get_if_present(obj, "workers", s.workers);
    get_if_present(obj, "groups", s.groups);
    get_if_present(obj, "t_min", s.t_min);
    get_if_present(obj, "max_evals", s.max_evals);
    get_if_present(obj, "seed", s.seed);
    get_if_present(obj, "omp_threads", s.omp_threads);
    return s;
}

mc::SimulationPlan parse_plan(const json& obj, const std::string& where) {
    reject_unknown(obj, {"num_paths", "dt", "seed", "workers", "block_size"}, where);
    mc::SimulationPlan p;
    get_if_present(obj, "num_paths", p.num_paths);
    get_if_present(obj, "dt", p.dt);
    get_if_present(obj, "seed", p.seed);
    get_if_present(obj, "workers", p.workers);
    get_if_present(obj, "block_size", p.block_size);
    return p;
}

}  // namespace

void RunConfig::validate() const {
    if (model != "static" && model != "case1" && model != "case2")
        throw config_error("model must be one of static, case1, case2");
    if (technique != "T_I" && technique != "T_II")
        throw config_error("technique must be T_I or T_II");
    if (technique == "T_II" && model != "case2")
        throw config_error("technique T_II is only wired up for the case2 model");
    for (const auto& [name, range] : bounds)
        if (!(range.first < range.second))
            throw config_error("bounds for " + name + ": lower must be below upper");
    try {
        schedule.validate();
        plan.validate();
        if (report_plan) report_plan->validate();
    } catch (const std::domain_error& e) {
        throw config_error(e.what());
    }
}

RunConfig parse_config_text(const std::string& text) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(obj,
                   {"model", "technique", "surface", "slice", "fixed", "bounds",
                    "annealing", "simulation", "report_simulation", "output_dir"},
                   "config");
    RunConfig c;
    get_if_present(obj, "model", c.model);
    get_if_present(obj, "technique", c.technique);
    get_if_present(obj, "surface", c.surface_path);
    get_if_present(obj, "slice", c.slice);
    get_if_present(obj, "output_dir", c.output_dir);
    if (obj.contains("fixed")) {
        for (const auto& [key, value] : obj["fixed"].items()) {
            if (!value.is_number())
                throw config_error("fixed." + key + " must be a number");
            c.fixed[key] = value.get<double>();
        }
    }
    if (obj.contains("bounds")) {
        for (const auto& [key, value] : obj["bounds"].items()) {
            if (!value.is_array() || value.size() != 2)
                throw config_error("bounds." + key + " must be [lower, upper]");
            c.bounds[key] = {value[0].get<double>(), value[1].get<double>()};
        }
    }
    if (obj.contains("annealing")) c.schedule = parse_schedule(obj["annealing"]);
    if (obj.contains("simulation")) c.plan = parse_plan(obj["simulation"], "simulation");
    if (obj.contains("report_simulation"))
        c.report_plan = parse_plan(obj["report_simulation"], "report_simulation");
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

std::optional<int> apply_worker_env(RunConfig& config) {
    const char* env = std::getenv("SABR_WORKERS");
    if (!env) return std::nullopt;
    int budget{};
    const auto res = std::from_chars(env, env + std::string(env).size(), budget);
    if (res.ec != std::errc{} || *res.ptr != '\0' || budget < 1)
        throw config_error("SABR_WORKERS must be a positive integer");
    // The budget caps thread counts only; logical decompositions (chain and
    // block layout) stay put so results do not change.
    config.schedule.omp_threads = budget;
    config.plan.workers = budget;
    if (config.report_plan) config.report_plan->workers = budget;
    return budget;
}

std::string report_to_csv(const CalibrationReport& report) {
    std::ostringstream out;
    out << "# model," << report.model << "\n";
    out << "# technique," << report.technique << "\n";
    out << "# quantity," << report.quantity << "\n";
    for (const auto& [name, value] : report.params)
        out << "# param," << name << "," << fmt(value) << "\n";
    out << "# final_cost," << fmt(report.final_cost) << "\n";
    out << "# mean_rel_error," << fmt(report.mean_rel_error) << "\n";
    out << "# max_rel_error," << fmt(report.max_rel_error) << "\n";
    out << "# evals," << report.evals << "\n";
    out << "# seed," << report.seed << "\n";
    out << "maturity,strike,market,model,rel_error\n";
    for (const auto& row : report.rows)
        out << fmt(row.maturity) << "," << fmt(row.strike) << "," << fmt(row.market)
            << "," << fmt(row.model) << "," << fmt(row.rel_error) << "\n";
    return out.str();
}

std::string report_to_json(const CalibrationReport& report) {
    json obj;
    obj["schema_version"] = 1;
    obj["model"] = report.model;
    obj["technique"] = report.technique;
    obj["quantity"] = report.quantity;
    obj["params"] = report.params;
    obj["final_cost"] = report.final_cost;
    obj["mean_rel_error"] = report.mean_rel_error;
    obj["max_rel_error"] = report.max_rel_error;
    obj["wall_seconds"] = report.wall_seconds;
    obj["evals"] = report.evals;
    obj["seed"] = report.seed;
    auto rows = json::array();
    for (const auto& row : report.rows)
        rows.push_back({{"maturity", row.maturity},
                        {"strike", row.strike},
                        {"market", row.market},
                        {"model", row.model},
                        {"rel_error", row.rel_error}});
    obj["rows"] = std::move(rows);
    return obj.dump(2) + "\n";
}

void write_report(const CalibrationReport& report, const std::string& stem) {
    {
        std::ofstream out(stem + ".csv");
        if (!out) throw std::runtime_error("cannot write " + stem + ".csv");
        out << report_to_csv(report);
    }
    std::ofstream out(stem + ".json");
    if (!out) throw std::runtime_error("cannot write " + stem + ".json");
    out << report_to_json(report);
}

std::string price_to_json(const mc::PriceEstimate& estimate, const std::string& label,
                          std::uint64_t seed, double dt, double wall_seconds) {
    json obj;
    obj["schema_version"] = 1;
    obj["label"] = label;
    obj["value"] = estimate.value;
    obj["std_error"] = estimate.std_error;
    obj["num_paths"] = estimate.num_paths;
    obj["dt"] = dt;
    obj["seed"] = seed;
    obj["wall_seconds"] = wall_seconds;
    return obj.dump(2) + "\n";
}

}  // namespace sabr::io
