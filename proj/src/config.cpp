#include "hbif/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hbif {

using nlohmann::json;

std::string config_to_json(const Config& c) {
    json j;
    j["grid"]["n"] = c.grid_n;
    j["model"]["M"] = c.model_M;
    j["model"]["kappa"] = c.model_kappa;
    j["model"]["p"] = c.model_p;
    json modes = json::array();
    for (const auto& [k, b] : c.h_modes)
        modes.push_back(json::array({k, b}));
    j["model"]["h_modes"] = modes;
    j["solver"]["newton_tol"] = c.newton_tol;
    j["solver"]["max_iterations"] = c.max_iterations;
    j["solver"]["damping_min"] = c.damping_min;
    j["continuation"]["ds0"] = c.ds0;
    j["continuation"]["ds_min"] = c.ds_min;
    j["continuation"]["ds_max"] = c.ds_max;
    j["continuation"]["tol_deg"] = c.tol_deg;
    j["continuation"]["c_switch_factor"] = c.c_switch_factor;
    j["verify"]["levels"] = c.verify_level;
    j["verify"]["seed"] = c.seed;
    return j.dump(2) + "\n";
}

Config config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config parse error: ") + e.what());
    }
    Config c;
    try {
        const json grid = j.value("grid", json::object());
        c.grid_n = grid.value("n", c.grid_n);
        const json model = j.value("model", json::object());
        c.model_M = model.value("M", c.model_M);
        c.model_kappa = model.value("kappa", c.model_kappa);
        c.model_p = model.value("p", c.model_p);
        if (model.contains("h_modes")) {
            c.h_modes.clear();
            for (const json& m : model.at("h_modes"))
                c.h_modes.emplace_back(m.at(0).get<int>(), m.at(1).get<double>());
        }
        const json solver = j.value("solver", json::object());
        c.newton_tol = solver.value("newton_tol", c.newton_tol);
        c.max_iterations = solver.value("max_iterations", c.max_iterations);
        c.damping_min = solver.value("damping_min", c.damping_min);
        const json cont = j.value("continuation", json::object());
        c.ds0 = cont.value("ds0", c.ds0);
        c.ds_min = cont.value("ds_min", c.ds_min);
        c.ds_max = cont.value("ds_max", c.ds_max);
        c.tol_deg = cont.value("tol_deg", c.tol_deg);
        c.c_switch_factor = cont.value("c_switch_factor", c.c_switch_factor);
        const json verify = j.value("verify", json::object());
        c.verify_level = verify.value("levels", c.verify_level);
        c.seed = verify.value("seed", c.seed);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config field error: ") + e.what());
    }
    if (c.newton_tol <= 0 || c.damping_min <= 0 || c.damping_min > 1)
        throw std::invalid_argument("config: bad solver settings");
    if (c.ds0 <= 0 || c.ds_min <= 0 || c.ds_max < c.ds0)
        throw std::invalid_argument("config: bad continuation step settings");
    if (c.verify_level != "smoke" && c.verify_level != "full")
        throw std::invalid_argument("config: verify.levels must be smoke or full");
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str());
}

void save_config(const Config& config, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << config_to_json(config);
}

std::string config_digest(const Config& config) {
    // FNV-1a over the canonical serialization
    const std::string s = config_to_json(config);
    unsigned long long h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", h);
    return buf;
}

SolverConfig solver_config(const Config& config) {
    SolverConfig s;
    s.newton_tol = config.newton_tol;
    s.max_iterations = config.max_iterations;
    s.damping_min = config.damping_min;
    s.tol_deg = config.tol_deg;
    return s;
}

StepConfig step_config(const Config& config) {
    StepConfig st;
    st.ds0 = config.ds0;
    st.ds_min = config.ds_min;
    st.ds_max = config.ds_max;
    st.c_switch_factor = config.c_switch_factor;
    st.newton = solver_config(config);
    return st;
}

Problem problem_from_config(const Config& config) {
    Grid grid = make_grid(config.grid_n);
    CompetitionTerm f = make_competition_term(config.model_M, config.model_kappa, config.model_p);
    HarvestTerm h = build_harvest(grid, config.h_modes);
    return make_problem(std::move(grid), f, std::move(h));
}

} // namespace hbif
